#pragma once

#include <string_view>

namespace orca {

/// Orders identifiers with embedded numbers numerically: CAPEC-13 < CAPEC-122 < CAPEC-1000.
bool natural_less(std::string_view a, std::string_view b) noexcept;

struct IdLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const noexcept { return natural_less(a, b); }
};

/// True for "CWE-<digits>".
bool is_cwe_id(std::string_view id) noexcept;

}  // namespace orca
