#include "orca/scoring.hpp"

#include <cmath>

#include "orca/error.hpp"
#include "orca/util.hpp"

namespace orca {

std::string_view to_string(Band b) noexcept {
  switch (b) {
    case Band::Low: return "Low";
    case Band::Medium: return "Medium";
    case Band::High: return "High";
  }
  return "Low";
}

std::optional<Band> parse_band(std::string_view text) noexcept {
  if (text == "Low" || text == "low") return Band::Low;
  if (text == "Medium" || text == "medium") return Band::Medium;
  if (text == "High" || text == "high") return Band::High;
  return std::nullopt;
}

Band band(double score) {
  if (!(score >= 0.0 && score <= 10.0)) throw ValidationError("band: score " + std::to_string(score) + " outside [0, 10]");
  if (score >= 6.67) return Band::High;
  if (score >= 3.34) return Band::Medium;
  return Band::Low;
}

ThreatScore score_threat(std::string_view threat_id, std::span<const ExtractionRow> rows, CvssVersion version) {
  ThreatScore s;
  s.threat_id = std::string(threat_id);
  s.cvss_version = version;
  s.cve_count = rows.size();
  if (rows.empty()) return s;

  double impact = 0, exploitability = 0, base = 0;
  for (const auto& r : rows) {
    if (r.threat_id != threat_id)
      throw ValidationError("score_threat: row for " + r.threat_id + " passed while scoring " + std::string(threat_id));
    impact += r.impact;
    exploitability += r.exploitability;
    base += r.base;
  }
  const auto n = static_cast<double>(rows.size());
  s.avg_impact = impact / n;
  s.avg_exploitability = exploitability / n;
  s.avg_base = base / n;
  // Banded on the reported two-decimal value so a printed 6.67 never reads Medium.
  s.band_impact = band(round_half_up(*s.avg_impact, 2));
  s.band_exploitability = band(round_half_up(*s.avg_exploitability, 2));
  s.band_base = band(round_half_up(*s.avg_base, 2));
  return s;
}

QualitativeRisk qualitative_risk(Level severity, Level likelihood) noexcept {
  return {severity, likelihood, static_cast<int>(severity) * static_cast<int>(likelihood)};
}

}  // namespace orca
