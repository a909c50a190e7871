#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "orca/corpus.hpp"
#include "orca/extraction.hpp"
#include "orca/threatmodel.hpp"

namespace orca {

enum class Band { Low = 1, Medium = 2, High = 3 };

std::string_view to_string(Band b) noexcept;
std::optional<Band> parse_band(std::string_view text) noexcept;

/// High for [6.67, 10], Medium for [3.34, 6.67), Low for [0, 3.34).
/// Throws ValidationError outside [0, 10].
Band band(double score);

struct ThreatScore {
  std::string threat_id;
  CvssVersion cvss_version = CvssVersion::v2;
  // Unrounded means; absent when the threat has no rows.
  std::optional<double> avg_impact;
  std::optional<double> avg_exploitability;
  std::optional<double> avg_base;
  std::size_t cve_count = 0;
  std::optional<Band> band_impact;
  std::optional<Band> band_exploitability;
  std::optional<Band> band_base;

  bool scoreable() const noexcept { return cve_count > 0; }
};

/// Means over every row (repeated CVEs included). Throws ValidationError when rows mix
/// threat ids.
ThreatScore score_threat(std::string_view threat_id, std::span<const ExtractionRow> rows, CvssVersion version);

struct QualitativeRisk {
  Level severity = Level::Low;
  Level likelihood = Level::Low;
  int risk = 1;
};

/// risk = severity × likelihood with Low=1, Medium=2, High=3.
QualitativeRisk qualitative_risk(Level severity, Level likelihood) noexcept;

}  // namespace orca
