#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orca/corpus.hpp"
#include "orca/extraction.hpp"
#include "orca/mapping.hpp"
#include "orca/scoring.hpp"

namespace orca {

enum class HeatmapMode { count, base_sum };

std::string_view to_string(HeatmapMode m) noexcept;
std::optional<HeatmapMode> parse_heatmap_mode(std::string_view text) noexcept;

struct TacticHeatmap {
  std::vector<std::string> rows;     // threat ids
  std::vector<std::string> columns;  // tactic ids
  std::vector<std::vector<double>> cells;
  std::vector<std::string> warnings;

  /// 0 for unknown labels.
  double cell(std::string_view threat_id, std::string_view tactic_id) const;
};

struct HeatmapInputs {
  std::span<const std::string> threat_ids = {};  // row labels even when unmapped
  std::span<const MappingResult> mappings = {};  // TCM results are ignored
  const AttackCorpus* attack = nullptr;
  HeatmapMode mode = HeatmapMode::count;
  // base_sum only: rows are attributed to a technique through its own expanded CAPEC set.
  std::span<const ExtractionRow> extraction = {};
  const CapecCorpus* patterns = nullptr;
  ScanMode scan = ScanMode::Normal;
};

/// Rows and columns in natural id order; columns are every tactic in the ATT&CK corpus.
TacticHeatmap build_heatmap(const HeatmapInputs& inputs);

struct ScoreRow {
  Branch branch = Branch::TCM;
  std::string title;
  ThreatScore score;
  std::optional<QualitativeRisk> risk;
};

struct ThreatCounts {
  std::size_t rows = 0;
  std::size_t cves = 0;
};

struct RunManifest {
  std::map<std::string, std::string> config;          // echo of every effective setting
  std::map<std::string, std::string> corpus_hashes;   // kind -> sha256
  std::map<std::string, std::string> snapshot_dates;  // kind -> newest modified date seen
  std::string provider_tag;
  Timestamp started{};
  Timestamp finished{};
  std::map<std::string, std::map<std::string, ThreatCounts>> counts;  // branch -> threat -> counts
  std::optional<Date> delta_since;
  std::vector<std::string> warnings;
};

std::string manifest_json(const RunManifest& manifest);
/// Throws ParseError when the manifest is unreadable.
RunManifest parse_manifest(std::string_view json);

enum class ReportFormat { csv, json, heatmap_matrix };

struct ReportSet {
  std::vector<ScoreRow> scores;
  std::vector<MappingResult> mappings;
  TacticHeatmap heatmap;
  RunManifest manifest;
  std::map<Branch, std::vector<ExtractionRow>> extraction;
  CvssVersion cvss_version = CvssVersion::v2;
};

std::string scores_csv(std::span<const ScoreRow> scores);
std::string scores_json(std::span<const ScoreRow> scores, std::optional<Date> delta_since);
std::string mappings_txt(std::span<const MappingResult> mappings);
std::string heatmap_csv(const TacticHeatmap& heatmap, HeatmapMode mode);
/// Fixed-width table with one-decimal averages, for terminals.
std::string scores_table(std::span<const ScoreRow> scores);

/// Writes the requested files plus mappings.txt and manifest.json. Every file is staged
/// next to its destination and renamed only after all were written. Returns final paths.
/// Throws Error when the directory is not writable, before anything becomes visible.
std::vector<std::filesystem::path> emit_reports(const ReportSet& reports, const std::filesystem::path& out_dir,
                                                const std::set<ReportFormat>& formats,
                                                HeatmapMode heatmap_mode = HeatmapMode::count);

}  // namespace orca
