#include "orca/report.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "orca/error.hpp"
#include "orca/util.hpp"

namespace orca {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(HeatmapMode m) noexcept { return m == HeatmapMode::count ? "count" : "base_sum"; }

std::optional<HeatmapMode> parse_heatmap_mode(std::string_view text) noexcept {
  if (text == "count") return HeatmapMode::count;
  if (text == "base_sum") return HeatmapMode::base_sum;
  return std::nullopt;
}

double TacticHeatmap::cell(std::string_view threat_id, std::string_view tactic_id) const {
  auto r = std::find(rows.begin(), rows.end(), threat_id);
  auto c = std::find(columns.begin(), columns.end(), tactic_id);
  if (r == rows.end() || c == columns.end()) return 0;
  return cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

TacticHeatmap build_heatmap(const HeatmapInputs& in) {
  if (!in.attack) throw ValidationError("build_heatmap: ATT&CK corpus required");
  if (in.mode == HeatmapMode::base_sum && !in.patterns)
    throw ValidationError("build_heatmap: base_sum mode needs the CAPEC corpus");

  TacticHeatmap map;
  std::set<std::string, IdLess> row_ids(in.threat_ids.begin(), in.threat_ids.end());
  for (const auto& m : in.mappings)
    if (m.branch == Branch::TTM) row_ids.insert(m.threat_id);
  map.rows.assign(row_ids.begin(), row_ids.end());
  for (const auto& [id, tactic] : in.attack->tactics) map.columns.push_back(id);
  map.cells.assign(map.rows.size(), std::vector<double>(map.columns.size(), 0.0));

  auto row_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(map.rows.begin(), map.rows.end(), id, IdLess{}) - map.rows.begin());
  };
  auto column_of = [&](const std::string& id) -> std::optional<std::size_t> {
    auto it = std::lower_bound(map.columns.begin(), map.columns.end(), id, IdLess{});
    if (it == map.columns.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - map.columns.begin());
  };

  for (const auto& m : in.mappings) {
    if (m.branch != Branch::TTM) continue;
    const TechniqueEntry* technique = in.attack->find_technique(m.target_id);
    if (!technique || technique->tactic_ids.empty()) {
      map.warnings.push_back(m.threat_id + ": technique " + m.target_id + " has no tactics, skipped");
      continue;
    }
    double amount = 1.0;
    if (in.mode == HeatmapMode::base_sum) {
      CapecSet own;
      for (const auto& c : technique->capec_ids)
        if (const auto* p = in.patterns->find(c); p && !p->deprecated) own.insert(c);
      own = expand_capecs(own, *in.patterns, in.scan);
      double sum = 0;
      std::size_t n = 0;
      for (const auto& row : in.extraction) {
        if (row.threat_id != m.threat_id || !own.contains(row.capec_id)) continue;
        sum += row.base;
        ++n;
      }
      amount = n ? sum / static_cast<double>(n) : 0.0;
    }
    const std::size_t r = row_of(m.threat_id);
    for (const auto& tactic : technique->tactic_ids) {
      if (auto c = column_of(tactic))
        map.cells[r][*c] += amount;
      else
        map.warnings.push_back(m.target_id + ": tactic " + tactic + " not in the tactic list");
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Manifest

std::string manifest_json(const RunManifest& m) {
  json counts = json::object();
  for (const auto& [branch, per_threat] : m.counts) {
    json entries = json::object();
    for (const auto& [threat, c] : per_threat) entries[threat] = {{"rows", c.rows}, {"cves", c.cves}};
    counts[branch] = std::move(entries);
  }
  json out = {{"config", m.config},
              {"corpus_hashes", m.corpus_hashes},
              {"snapshot_dates", m.snapshot_dates},
              {"provider_tag", m.provider_tag},
              {"started", format_timestamp(m.started)},
              {"finished", format_timestamp(m.finished)},
              {"counts", counts},
              {"delta_since", m.delta_since ? json(format_date(*m.delta_since)) : json(nullptr)},
              {"warnings", m.warnings}};
  return out.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.corpus_hashes = j.value("corpus_hashes", std::map<std::string, std::string>{});
    m.snapshot_dates = j.value("snapshot_dates", std::map<std::string, std::string>{});
    m.provider_tag = j.value("provider_tag", std::string{});
    auto ts = [&](const char* key) {
      auto parsed = parse_timestamp(j.at(key).get<std::string>());
      if (!parsed) throw ParseError("manifest", std::string("bad timestamp in '") + key + "'");
      return *parsed;
    };
    m.started = ts("started");
    m.finished = ts("finished");
    const json counts = j.value("counts", json::object());
    for (const auto& [branch, per_threat] : counts.items())
      for (const auto& [threat, c] : per_threat.items())
        m.counts[branch][threat] = {c.at("rows").get<std::size_t>(), c.at("cves").get<std::size_t>()};
    if (auto d = j.find("delta_since"); d != j.end() && d->is_string()) m.delta_since = parse_date(d->get<std::string>());
    m.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError("manifest", e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? format_fixed(*v, digits) : std::string{}; }

std::string opt_band(const std::optional<Band>& b) { return b ? std::string(to_string(*b)) : std::string{}; }

json opt_json(const std::optional<double>& v) { return v ? json(round_half_up(*v, 2)) : json(nullptr); }

}  // namespace

std::string scores_csv(std::span<const ScoreRow> scores) {
  std::string out =
      "branch,threat_id,cvss_version,avg_impact,avg_exploitability,avg_base,band_impact,band_exploitability,band_base,"
      "cve_count,scoreable,severity,likelihood,risk\n";
  for (const auto& row : scores) {
    const ThreatScore& s = row.score;
    out += std::string(to_string(row.branch)) + "," + s.threat_id + "," + std::string(to_string(s.cvss_version)) + "," +
           opt_fixed(s.avg_impact, 2) + "," + opt_fixed(s.avg_exploitability, 2) + "," + opt_fixed(s.avg_base, 2) + "," +
           opt_band(s.band_impact) + "," + opt_band(s.band_exploitability) + "," + opt_band(s.band_base) + "," +
           std::to_string(s.cve_count) + "," + (s.scoreable() ? "true" : "false") + ",";
    if (row.risk)
      out += std::string(to_string(row.risk->severity)) + "," + std::string(to_string(row.risk->likelihood)) + "," +
             std::to_string(row.risk->risk);
    else
      out += ",,";
    out += "\n";
  }
  return out;
}

std::string scores_json(std::span<const ScoreRow> scores, std::optional<Date> delta_since) {
  json threats = json::array();
  for (const auto& row : scores) {
    const ThreatScore& s = row.score;
    json t = {{"branch", to_string(row.branch)},
              {"threat_id", s.threat_id},
              {"title", row.title},
              {"cvss_version", to_string(s.cvss_version)},
              {"avg_impact", opt_json(s.avg_impact)},
              {"avg_exploitability", opt_json(s.avg_exploitability)},
              {"avg_base", opt_json(s.avg_base)},
              {"band_impact", s.band_impact ? json(to_string(*s.band_impact)) : json(nullptr)},
              {"band_exploitability", s.band_exploitability ? json(to_string(*s.band_exploitability)) : json(nullptr)},
              {"band_base", s.band_base ? json(to_string(*s.band_base)) : json(nullptr)},
              {"cve_count", s.cve_count},
              {"scoreable", s.scoreable()}};
    if (row.risk)
      t["qualitative"] = {{"severity", to_string(row.risk->severity)},
                          {"likelihood", to_string(row.risk->likelihood)},
                          {"risk", row.risk->risk}};
    threats.push_back(std::move(t));
  }
  json out = {{"threats", threats}};
  if (delta_since) out["annotation"] = "delta since " + format_date(*delta_since);
  return out.dump(2) + "\n";
}

std::string mappings_txt(std::span<const MappingResult> mappings) {
  std::string out;
  for (const auto& m : mappings) out += format_mapping_line(m) + "\n";
  return out;
}

std::string heatmap_csv(const TacticHeatmap& heatmap, HeatmapMode mode) {
  std::string out = "threat_id";
  for (const auto& c : heatmap.columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < heatmap.rows.size(); ++r) {
    out += heatmap.rows[r];
    for (double v : heatmap.cells[r])
      out += "," + (mode == HeatmapMode::count ? std::to_string(static_cast<long long>(v)) : format_fixed(v, 4));
    out += "\n";
  }
  return out;
}

std::string scores_table(std::span<const ScoreRow> scores) {
  std::string out;
  std::array<char, 256> line{};
  std::snprintf(line.data(), line.size(), "%-16s %-6s %7s %7s %7s %8s  %-6s %-6s %4s\n", "Threat", "Branch", "Impact",
                "Exploit", "Base", "CVEs", "Sev", "Lik", "Risk");
  out += line.data();
  auto cell = [](const std::optional<double>& v) { return v ? format_fixed(*v, 1) : std::string("-"); };
  for (const auto& row : scores) {
    const auto& s = row.score;
    std::snprintf(line.data(), line.size(), "%-16s %-6s %7s %7s %7s %8zu  %-6s %-6s %4s\n", s.threat_id.c_str(),
                  std::string(to_string(row.branch)).c_str(), cell(s.avg_impact).c_str(),
                  cell(s.avg_exploitability).c_str(), cell(s.avg_base).c_str(), s.cve_count,
                  row.risk ? std::string(to_string(row.risk->severity)).c_str() : "-",
                  row.risk ? std::string(to_string(row.risk->likelihood)).c_str() : "-",
                  row.risk ? std::to_string(row.risk->risk).c_str() : "-");
    out += line.data();
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<fs::path> emit_reports(const ReportSet& reports, const fs::path& out_dir,
                                   const std::set<ReportFormat>& formats, HeatmapMode heatmap_mode) {
  std::vector<std::pair<std::string, std::string>> files;
  if (formats.contains(ReportFormat::csv)) {
    files.emplace_back("scores.csv", scores_csv(reports.scores));
    for (const auto& [branch, rows] : reports.extraction) {
      const std::string suffix = branch == Branch::TTM ? "ttm" : "tcm";
      files.emplace_back("extraction_" + suffix + ".csv", extraction_csv(rows, reports.cvss_version));
      files.emplace_back("extraction_" + suffix + ".orc", serialize_extraction_cache(rows, reports.cvss_version));
    }
  }
  if (formats.contains(ReportFormat::json)) files.emplace_back("scores.json", scores_json(reports.scores, reports.manifest.delta_since));
  if (formats.contains(ReportFormat::heatmap_matrix)) files.emplace_back("heatmap.csv", heatmap_csv(reports.heatmap, heatmap_mode));
  files.emplace_back("mappings.txt", mappings_txt(reports.mappings));
  files.emplace_back("manifest.json", manifest_json(reports.manifest));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir.string());

  const std::string tmp_suffix = ".tmp-" + std::to_string(::getpid());
  std::vector<fs::path> staged;
  auto discard = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = out_dir / ("." + name + tmp_suffix);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) staged.push_back(tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      discard();
      throw Error("cannot write " + (out_dir / name).string());
    }
  }
  // A directory squatting on a report name would make its rename fail after earlier files
  // were already moved; refuse up front instead.
  for (const auto& [name, content] : files) {
    if (fs::is_directory(out_dir / name, ec)) {
      discard();
      throw Error("cannot replace directory " + (out_dir / name).string() + " with a report");
    }
  }
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const fs::path final_path = out_dir / files[i].first;
    fs::rename(staged[i], final_path, ec);
    if (ec) {
      discard();
      throw Error("cannot move report into place: " + final_path.string());
    }
    written.push_back(final_path);
  }
  return written;
}

}  // namespace orca
