#include "orca/extraction.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "cache_codec.hpp"
#include "orca/error.hpp"
#include "orca/util.hpp"

namespace orca {

std::string_view to_string(ScanMode m) noexcept { return m == ScanMode::Normal ? "Normal" : "Deep"; }

std::optional<ScanMode> parse_scan_mode(std::string_view text) noexcept {
  if (text == "Normal" || text == "normal" || text == "N") return ScanMode::Normal;
  if (text == "Deep" || text == "deep" || text == "D") return ScanMode::Deep;
  return std::nullopt;
}

CapecSet expand_capecs(const CapecSet& seeds, const CapecCorpus& patterns, ScanMode mode) {
  for (const auto& seed : seeds)
    if (!patterns.find(seed)) throw LookupError(seed);
  if (mode == ScanMode::Normal) return seeds;

  auto active = [&](const std::string& id) -> const AttackPattern* {
    const AttackPattern* p = patterns.find(id);
    return p && !p->deprecated ? p : nullptr;
  };

  // Transitive closure over parent_of; the visited set terminates cycles.
  CapecSet closure = seeds;
  std::deque<std::string> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    const AttackPattern* p = active(queue.front());
    queue.pop_front();
    if (!p) continue;
    for (const auto& child : p->parent_of)
      if (active(child) && closure.insert(child).second) queue.push_back(child);
  }

  // One hop of can_precede from every member of the closure, no recursion.
  CapecSet out = closure;
  for (const auto& id : closure) {
    const AttackPattern* p = active(id);
    if (!p) continue;
    for (const auto& next : p->can_precede)
      if (active(next)) out.insert(next);
  }
  return out;
}

CapecSet seed_capecs(const MappingResult& mapping, const AttackCorpus& attack, const CapecCorpus& patterns,
                     std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  CapecSet seeds;
  auto consider = [&](const std::string& capec_id) {
    const AttackPattern* p = patterns.find(capec_id);
    if (!p)
      warn(mapping.threat_id + ": " + capec_id + " not in CAPEC snapshot, skipped");
    else if (p->deprecated)
      warn(mapping.threat_id + ": " + capec_id + " is deprecated, skipped");
    else
      seeds.insert(capec_id);
  };
  if (mapping.branch == Branch::TCM) {
    consider(mapping.target_id);
  } else if (const TechniqueEntry* t = attack.find_technique(mapping.target_id)) {
    for (const auto& capec_id : t->capec_ids) consider(capec_id);
  } else {
    warn(mapping.threat_id + ": technique " + mapping.target_id + " not in ATT&CK snapshot, skipped");
  }
  return seeds;
}

ExtractionResult extract_rows(std::span<const MappingResult> mappings, const AttackCorpus& attack,
                              const CapecCorpus& patterns, const NvdStore& store, const ScanConfig& config) {
  if (config.tau < kEarliestDate) throw ValidationError("tau must not precede 1988-01-01");
  ExtractionResult result;
  auto& report = result.report;

  std::vector<std::string> order;
  std::map<std::string, CapecSet> seeds;
  for (const auto& m : mappings) {
    auto [it, inserted] = seeds.try_emplace(m.threat_id);
    if (inserted) order.push_back(m.threat_id);
    auto s = seed_capecs(m, attack, patterns, &report.warnings);
    it->second.insert(s.begin(), s.end());
  }

  const Timestamp tau{config.tau};
  for (const auto& threat_id : order) {
    ThreatExtractionStats stats;
    const CapecSet capecs = expand_capecs(seeds[threat_id], patterns, config.mode);
    stats.capecs = capecs.size();
    std::set<std::string, IdLess> cwes_seen;
    std::set<std::string, IdLess> cves_emitted;

    for (const auto& capec_id : capecs) {
      const AttackPattern& pattern = patterns.lookup(capec_id);
      for (const auto& cwe : pattern.related_cwes) {
        cwes_seen.insert(cwe);
        auto hit = store.index.find(cwe);
        if (hit == store.index.end()) continue;
        for (const auto& cve_id : hit->second) {
          const VulnerabilityRecord* record = store.find(cve_id);
          if (!record) {
            report.warnings.push_back("CWE index lists unknown " + cve_id);
            continue;
          }
          if (record->published < tau) {
            ++stats.before_tau;
            continue;
          }
          const auto& metrics = record->metrics(config.cvss_version);
          if (!metrics) {
            ++stats.unscoreable;
            continue;
          }
          if (config.omega && cves_emitted.contains(cve_id)) {
            ++stats.duplicates;
            continue;
          }
          cves_emitted.insert(cve_id);
          result.rows.push_back({threat_id, cve_id, cwe, capec_id, metrics->impact, metrics->exploitability,
                                 metrics->base, record->published});
          ++stats.rows;
        }
      }
    }
    stats.cwes = cwes_seen.size();
    stats.distinct_cves = cves_emitted.size();
    if (stats.rows == 0) report.threats_without_rows.push_back(threat_id);
    report.per_threat[threat_id] = stats;
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string extraction_csv(std::span<const ExtractionRow> rows, CvssVersion version) {
  const std::string v(to_string(version));
  std::string out = "threat_id,cve_id,cwe_id,capec_id," + v + "_impactScore," + v + "_exploitabilityScore," + v +
                    "_baseScore,published\n";
  for (const auto& r : rows) {
    out += r.threat_id + "," + r.cve_id + "," + r.cwe_id + "," + r.capec_id + "," + format_shortest(r.impact) + "," +
           format_shortest(r.exploitability) + "," + format_shortest(r.base) + "," + format_timestamp(r.published) + "\n";
  }
  return out;
}

std::vector<ExtractionRow> parse_extraction_csv(std::string_view csv) {
  std::vector<ExtractionRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("threat_id,cve_id,cwe_id,capec_id,"))
    throw ParseError("extraction.csv", "missing header");
  auto number = [](const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("extraction.csv", "bad number '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 8) throw ParseError("extraction.csv", "expected 8 columns: " + line);
    auto ts = parse_timestamp(cells[7]);
    if (!ts) throw ParseError("extraction.csv", "bad timestamp '" + cells[7] + "'");
    rows.push_back({cells[0], cells[1], cells[2], cells[3], number(cells[4]), number(cells[5]), number(cells[6]), *ts});
  }
  return rows;
}

std::string serialize_extraction_cache(std::span<const ExtractionRow> rows, CvssVersion version) {
  nlohmann::json data = {{"cvss_version", to_string(version)}, {"rows", nlohmann::json::array()}};
  for (const auto& r : rows)
    data["rows"].push_back({r.threat_id, r.cve_id, r.cwe_id, r.capec_id, r.impact, r.exploitability, r.base,
                            r.published.time_since_epoch().count()});
  return detail::wrap_cache("extraction", data);
}

std::vector<ExtractionRow> deserialize_extraction_cache(std::string_view bytes, CvssVersion* version) {
  const auto data = detail::unwrap_cache(bytes, "extraction");
  try {
    if (version) {
      auto v = parse_cvss_version(data.at("cvss_version").get<std::string>());
      if (!v) throw ParseError("extraction cache", "unknown CVSS version");
      *version = *v;
    }
    std::vector<ExtractionRow> rows;
    for (const auto& r : data.at("rows"))
      rows.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>(), r.at(2).get<std::string>(),
                      r.at(3).get<std::string>(), r.at(4).get<double>(), r.at(5).get<double>(), r.at(6).get<double>(),
                      Timestamp{std::chrono::seconds{r.at(7).get<std::int64_t>()}}});
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("extraction cache", std::string("corrupt payload: ") + e.what());
  }
}

}  // namespace orca
