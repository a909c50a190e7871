#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orca/extraction.hpp"
#include "orca/mapping.hpp"
#include "orca/report.hpp"
#include "orca/scoring.hpp"
#include "orca/semsim.hpp"
#include "orca/threatmodel.hpp"

namespace orca {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2, kExitGate = 3 };

enum class BranchSelection { TTM, TCM, both };
enum class ProviderKind { baseline, service };
enum class GateMetric { base, impact, exploitability };

std::string_view to_string(BranchSelection b) noexcept;
std::string_view to_string(ProviderKind p) noexcept;
std::string_view to_string(GateMetric g) noexcept;
std::optional<BranchSelection> parse_branch(std::string_view text) noexcept;
std::optional<ProviderKind> parse_provider(std::string_view text) noexcept;
std::optional<GateMetric> parse_gate_metric(std::string_view text) noexcept;

struct GateConfig {
  GateMetric metric = GateMetric::base;
  Band band_at_or_above = Band::High;
};

/// Defaults reproduce the demonstration setup: TCM, SFC, Normal, ω=false, CVSS v2,
/// τ=1998-01-01, threshold 0.55.
struct PipelineConfig {
  std::filesystem::path threats;
  ThreatFormat format = ThreatFormat::json;
  std::filesystem::path capec;
  std::filesystem::path attack;
  std::filesystem::path fight;  // optional
  std::filesystem::path nvd;    // file or directory of *.json
  BranchSelection branch = BranchSelection::TCM;
  double threshold = 0.55;
  FilterCriterion filter = FilterCriterion::SFC;
  ScanConfig scan;
  ProviderKind provider = ProviderKind::baseline;
  std::string endpoint;
  Preselect preselect = Preselect::psi;
  std::optional<GateConfig> gate;
  std::filesystem::path out = "orca-out";
  std::filesystem::path cache_dir;  // empty: <out>/.orca-cache
  bool use_cache = true;
  std::size_t workers = 1;
  std::size_t top_k = 3;
  std::size_t batch_cap = 32;
  HeatmapMode heatmap_mode = HeatmapMode::count;
  std::string domain = "enterprise-attack";
};

/// Throws ValidationError describing the first violated constraint.
void validate(const PipelineConfig& config);

/// Applies the keys of a JSON config object onto `config`. Unknown keys are an error.
void apply_config_json(std::string_view json, PipelineConfig& config);

/// Key/value echo for the run manifest.
std::map<std::string, std::string> describe(const PipelineConfig& config);

/// True when some scoreable threat reaches the configured band on the gated metric.
bool gate_trips(const GateConfig& gate, std::span<const ScoreRow> scores);

struct PipelineOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> messages;  // warnings and errors, in order
  ReportSet reports;
  std::size_t cache_hits = 0;
};

/// Runs preprocess → tactics/TTM and/or TCM → extraction → scoring → reports.
/// `provider` overrides the configured embedding provider (tests inject fakes here).
PipelineOutcome run_pipeline(const PipelineConfig& config, std::shared_ptr<EmbeddingProvider> provider = nullptr);

/// run_pipeline with τ set to the date the previous run finished.
PipelineOutcome incremental_scan(PipelineConfig config, const std::filesystem::path& last_manifest,
                                 std::shared_ptr<EmbeddingProvider> provider = nullptr);

}  // namespace orca
