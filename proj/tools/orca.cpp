// Command line front end for the threat-analysis pipeline.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "orca/error.hpp"
#include "orca/pipeline.hpp"
#include "orca/util.hpp"

namespace {

template <typename T, typename Parse>
CLI::Validator choice(Parse parse, const char* what) {
  return CLI::Validator(
      [parse, what](std::string& value) -> std::string {
        if (parse(value)) return {};
        return std::string("unsupported ") + what + " '" + value + "'";
      },
      what);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace orca;

  CLI::App app{"orca: map O-RAN threats to ATT&CK and CAPEC, extract CVEs and score them"};
  app.set_version_flag("--version", "orca 1.0.0");

  std::string config_file, threats, format, capec, attack, fight, nvd, branch, filter, scan, tau, cvss, provider,
      endpoint, preselect, gate_metric, gate_band, out, cache_dir, heatmap_mode, domain, since_manifest;
  double threshold = 0;
  bool omega = false, no_cache = false, quiet = false;
  std::size_t workers = 0, top_k = 0, batch_cap = 0;

  app.add_option("--config", config_file, "JSON file with default settings; flags override it")->check(CLI::ExistingFile);
  app.add_option("--threats", threats, "threat model file");
  app.add_option("--format", format, "threat model format: json|csv")
      ->check(choice<ThreatFormat>(parse_threat_format, "format"));
  app.add_option("--capec", capec, "CAPEC STIX bundle");
  app.add_option("--attack", attack, "ATT&CK STIX bundle");
  app.add_option("--fight", fight, "FiGHT YAML (optional)");
  app.add_option("--nvd", nvd, "NVD JSON feed or a directory of feeds");
  app.add_option("--branch", branch, "TTM|TCM|both")->check(choice<BranchSelection>(parse_branch, "branch"));
  auto* threshold_opt = app.add_option("--threshold", threshold, "similarity threshold in [-1, 1]");
  app.add_option("--filter", filter, "HFC|SFC")->check(choice<FilterCriterion>(parse_filter, "filter"));
  app.add_option("--scan", scan, "Normal|Deep")->check(choice<ScanMode>(parse_scan_mode, "scan"));
  auto* omega_opt = app.add_flag("--omega", omega, "drop repeated (threat, CVE) rows");
  app.add_option("--tau", tau, "publication cutoff YYYY-MM-DD")->check(choice<Date>(parse_date, "date"));
  app.add_option("--cvss", cvss, "v2|v3|v4")->check(choice<CvssVersion>(parse_cvss_version, "CVSS version"));
  app.add_option("--provider", provider, "baseline|service")->check(choice<ProviderKind>(parse_provider, "provider"));
  app.add_option("--endpoint", endpoint, "embedding service URL (ORCA_ENDPOINT overrides)");
  app.add_option("--preselect", preselect, "psi|xi")->check(choice<Preselect>(parse_preselect, "preselect"));
  app.add_option("--gate-metric", gate_metric, "base|impact|exploitability")
      ->check(choice<GateMetric>(parse_gate_metric, "gate metric"));
  app.add_option("--gate-band", gate_band, "Medium|High")
      ->check(CLI::IsMember({"Medium", "High"}));
  app.add_option("--out", out, "output directory");
  app.add_option("--cache-dir", cache_dir, "snapshot cache directory (default <out>/.orca-cache)");
  auto* no_cache_opt = app.add_flag("--no-cache", no_cache, "ignore and do not write snapshot caches");
  app.add_option("--workers", workers, "parallel threat workers")->check(CLI::PositiveNumber);
  app.add_option("--top-k", top_k, "tactics kept by the baseline classifier")->check(CLI::PositiveNumber);
  app.add_option("--batch", batch_cap, "largest embedding batch sent to the service")->check(CLI::PositiveNumber);
  app.add_option("--heatmap-mode", heatmap_mode, "count|base_sum")
      ->check(choice<HeatmapMode>(parse_heatmap_mode, "heatmap mode"));
  app.add_option("--domain", domain, "domain tag written on mapping lines");
  app.add_option("--since-manifest", since_manifest, "manifest.json of a previous run; scans CVEs published since");
  app.add_flag("--quiet", quiet, "do not print the score table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  PipelineConfig config;
  try {
    if (!config_file.empty()) apply_config_json(read_file(config_file), config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (!threats.empty()) config.threats = threats;
  if (!format.empty()) config.format = *parse_threat_format(format);
  if (!capec.empty()) config.capec = capec;
  if (!attack.empty()) config.attack = attack;
  if (!fight.empty()) config.fight = fight;
  if (!nvd.empty()) config.nvd = nvd;
  if (!branch.empty()) config.branch = *parse_branch(branch);
  if (threshold_opt->count()) config.threshold = threshold;
  if (!filter.empty()) config.filter = *parse_filter(filter);
  if (!scan.empty()) config.scan.mode = *parse_scan_mode(scan);
  if (omega_opt->count()) config.scan.omega = omega;
  if (!tau.empty()) config.scan.tau = *parse_date(tau);
  if (!cvss.empty()) config.scan.cvss_version = *parse_cvss_version(cvss);
  if (!provider.empty()) config.provider = *parse_provider(provider);
  if (!endpoint.empty()) config.endpoint = endpoint;
  if (const char* env = std::getenv("ORCA_ENDPOINT"); env && *env) config.endpoint = env;
  if (!preselect.empty()) config.preselect = *parse_preselect(preselect);
  if (!gate_metric.empty() || !gate_band.empty()) {
    if (!config.gate) config.gate = GateConfig{};
    if (!gate_metric.empty()) config.gate->metric = *parse_gate_metric(gate_metric);
    if (!gate_band.empty()) config.gate->band_at_or_above = *parse_band(gate_band);
  }
  if (!out.empty()) config.out = out;
  if (!cache_dir.empty()) config.cache_dir = cache_dir;
  if (no_cache_opt->count()) config.use_cache = false;
  if (workers) config.workers = workers;
  if (top_k) config.top_k = top_k;
  if (batch_cap) config.batch_cap = batch_cap;
  if (!heatmap_mode.empty()) config.heatmap_mode = *parse_heatmap_mode(heatmap_mode);
  if (!domain.empty()) config.domain = domain;

  const PipelineOutcome outcome =
      since_manifest.empty() ? run_pipeline(config) : incremental_scan(config, since_manifest);

  for (const auto& message : outcome.messages) std::cerr << message << "\n";
  if (outcome.exit_code == kExitOk || outcome.exit_code == kExitGate) {
    if (!quiet) std::cout << scores_table(outcome.reports.scores);
    for (const auto& file : outcome.files) std::cout << "wrote " << file.string() << "\n";
  }
  return outcome.exit_code;
}
