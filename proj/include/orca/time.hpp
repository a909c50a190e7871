#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace orca {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Nothing published before this date is accepted as a CVE publication or τ.
inline constexpr Date kEarliestDate{std::chrono::year{1988} / 1 / 1};

/// Default inclusion period start; admits every CVE currently published.
inline constexpr Date kDefaultTau{std::chrono::year{1998} / 1 / 1};

/// Accepts "YYYY-MM-DD", optionally followed by 'T' or ' ' and "HH:MM[:SS[.fff]]" and an
/// optional "Z" / "+00:00" suffix. Offsets other than UTC are applied.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::optional<Date> parse_date(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp ts);
/// "YYYY-MM-DD"
std::string format_date(Date d);

}  // namespace orca
