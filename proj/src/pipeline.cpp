#include "orca/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "cache_codec.hpp"
#include "orca/corpus.hpp"
#include "orca/error.hpp"
#include "orca/tactics.hpp"
#include "orca/util.hpp"

namespace orca {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(BranchSelection b) noexcept {
  switch (b) {
    case BranchSelection::TTM: return "TTM";
    case BranchSelection::TCM: return "TCM";
    case BranchSelection::both: return "both";
  }
  return "TCM";
}

std::string_view to_string(ProviderKind p) noexcept { return p == ProviderKind::baseline ? "baseline" : "service"; }

std::string_view to_string(GateMetric g) noexcept {
  switch (g) {
    case GateMetric::base: return "base";
    case GateMetric::impact: return "impact";
    case GateMetric::exploitability: return "exploitability";
  }
  return "base";
}

std::optional<BranchSelection> parse_branch(std::string_view text) noexcept {
  if (text == "TTM" || text == "ttm") return BranchSelection::TTM;
  if (text == "TCM" || text == "tcm") return BranchSelection::TCM;
  if (text == "both") return BranchSelection::both;
  return std::nullopt;
}

std::optional<ProviderKind> parse_provider(std::string_view text) noexcept {
  if (text == "baseline") return ProviderKind::baseline;
  if (text == "service") return ProviderKind::service;
  return std::nullopt;
}

std::optional<GateMetric> parse_gate_metric(std::string_view text) noexcept {
  if (text == "base") return GateMetric::base;
  if (text == "impact") return GateMetric::impact;
  if (text == "exploitability") return GateMetric::exploitability;
  return std::nullopt;
}

namespace {

bool runs_ttm(const PipelineConfig& c) { return c.branch != BranchSelection::TCM; }
bool runs_tcm(const PipelineConfig& c) { return c.branch != BranchSelection::TTM; }

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw ValidationError(std::string(flag) + " is required");
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (!std::isfinite(c.threshold) || c.threshold < -1.0 || c.threshold > 1.0)
    throw ValidationError("--threshold must lie in [-1, 1]");
  if (c.scan.tau < kEarliestDate) throw ValidationError("--tau must not precede 1988-01-01");
  if (c.provider == ProviderKind::service && c.endpoint.empty())
    throw ValidationError("--endpoint (or ORCA_ENDPOINT) is required with --provider service");
  if (c.workers == 0) throw ValidationError("--workers must be positive");
  if (c.top_k == 0) throw ValidationError("--top-k must be positive");
  if (c.batch_cap == 0) throw ValidationError("--batch must be positive");
  if (c.out.empty()) throw ValidationError("--out is required");
  require_path(c.threats, "--threats");
  require_path(c.capec, "--capec");
  require_path(c.nvd, "--nvd");
  if (runs_ttm(c)) require_path(c.attack, "--attack");
  else if (!c.attack.empty()) require_path(c.attack, "--attack");
  if (!c.fight.empty()) require_path(c.fight, "--fight");
}

void apply_config_json(std::string_view text, PipelineConfig& c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");

  auto str = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw ValidationError("config '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto num = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ValidationError("config '" + key + "' must be a number");
    return v.get<double>();
  };
  auto count = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw ValidationError("config '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  auto flag = [](const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ValidationError("config '" + key + "' must be true or false");
    return v.get<bool>();
  };
  for (const auto& [key, v] : j.items()) {
    auto parsed = [&](auto opt) {
      if (!opt) throw ValidationError("config '" + key + "' has unsupported value " + v.dump());
      return *opt;
    };
    if (key == "threats") c.threats = str(v, key);
    else if (key == "format") c.format = parsed(parse_threat_format(str(v, key)));
    else if (key == "capec") c.capec = str(v, key);
    else if (key == "attack") c.attack = str(v, key);
    else if (key == "fight") c.fight = str(v, key);
    else if (key == "nvd") c.nvd = str(v, key);
    else if (key == "branch") c.branch = parsed(parse_branch(str(v, key)));
    else if (key == "threshold") c.threshold = num(v, key);
    else if (key == "filter") c.filter = parsed(parse_filter(str(v, key)));
    else if (key == "scan") c.scan.mode = parsed(parse_scan_mode(str(v, key)));
    else if (key == "omega") c.scan.omega = flag(v, key);
    else if (key == "tau") c.scan.tau = parsed(parse_date(str(v, key)));
    else if (key == "cvss") c.scan.cvss_version = parsed(parse_cvss_version(str(v, key)));
    else if (key == "provider") c.provider = parsed(parse_provider(str(v, key)));
    else if (key == "endpoint") c.endpoint = str(v, key);
    else if (key == "preselect") c.preselect = parsed(parse_preselect(str(v, key)));
    else if (key == "gate_metric") {
      if (!c.gate) c.gate = GateConfig{};
      c.gate->metric = parsed(parse_gate_metric(str(v, key)));
    } else if (key == "gate_band") {
      if (!c.gate) c.gate = GateConfig{};
      const Band b = parsed(parse_band(str(v, key)));
      if (b == Band::Low) throw ValidationError("config 'gate_band' must be Medium or High");
      c.gate->band_at_or_above = b;
    } else if (key == "out") c.out = str(v, key);
    else if (key == "cache_dir") c.cache_dir = str(v, key);
    else if (key == "use_cache") c.use_cache = flag(v, key);
    else if (key == "workers") c.workers = count(v, key);
    else if (key == "top_k") c.top_k = count(v, key);
    else if (key == "batch_cap") c.batch_cap = count(v, key);
    else if (key == "heatmap_mode") c.heatmap_mode = parsed(parse_heatmap_mode(str(v, key)));
    else if (key == "domain") c.domain = str(v, key);
    else throw ValidationError("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> describe(const PipelineConfig& c) {
  std::map<std::string, std::string> d = {
      {"threats", c.threats.string()},
      {"format", c.format == ThreatFormat::json ? "json" : "csv"},
      {"capec", c.capec.string()},
      {"attack", c.attack.string()},
      {"fight", c.fight.string()},
      {"nvd", c.nvd.string()},
      {"branch", std::string(to_string(c.branch))},
      {"threshold", format_shortest(c.threshold)},
      {"filter", std::string(to_string(c.filter))},
      {"scan", std::string(to_string(c.scan.mode))},
      {"omega", c.scan.omega ? "true" : "false"},
      {"tau", format_date(c.scan.tau)},
      {"cvss", std::string(to_string(c.scan.cvss_version))},
      {"provider", std::string(to_string(c.provider))},
      {"endpoint", c.endpoint},
      {"preselect", std::string(to_string(c.preselect))},
      {"top_k", std::to_string(c.top_k)},
      {"workers", std::to_string(c.workers)},
      {"heatmap_mode", std::string(to_string(c.heatmap_mode))},
      {"domain", c.domain},
  };
  if (c.gate) {
    d["gate_metric"] = std::string(to_string(c.gate->metric));
    d["gate_band"] = std::string(to_string(c.gate->band_at_or_above));
  }
  return d;
}

bool gate_trips(const GateConfig& gate, std::span<const ScoreRow> scores) {
  for (const auto& row : scores) {
    const ThreatScore& s = row.score;
    if (!s.scoreable()) continue;
    const std::optional<Band>& b = gate.metric == GateMetric::base     ? s.band_base
                                   : gate.metric == GateMetric::impact ? s.band_impact
                                                                       : s.band_exploitability;
    if (b && *b >= gate.band_at_or_above) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

struct Context {
  const PipelineConfig& config;
  PipelineOutcome& outcome;
  fs::path cache_dir;

  void note(std::string message) { outcome.messages.push_back(std::move(message)); }
};

void write_atomically(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write cache file " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Loads a snapshot from the cache when the content hash matches, otherwise ingests and
/// stores it. Cache trouble never fails the run; it only forces re-ingestion.
template <typename Snapshot, typename Ingest, typename Serialize, typename Deserialize>
Snapshot cached(Context& ctx, std::string_view kind, const std::string& hash, Ingest&& ingest, Serialize&& serialize,
                Deserialize&& deserialize) {
  const fs::path file = ctx.cache_dir / cache_file_name(kind, hash);
  if (ctx.config.use_cache && fs::exists(file)) {
    try {
      Snapshot s = deserialize(read_file(file));
      ++ctx.outcome.cache_hits;
      return s;
    } catch (const Error& e) {
      ctx.note(std::string("cache ") + file.string() + " ignored: " + e.what());
    }
  }
  Snapshot s = ingest();
  if (ctx.config.use_cache) {
    try {
      fs::create_directories(ctx.cache_dir);
      write_atomically(file, serialize(s));
    } catch (const std::exception& e) {
      ctx.note(std::string("could not write cache ") + file.string() + ": " + e.what());
    }
  }
  return s;
}

std::vector<fs::path> nvd_files(const fs::path& nvd) {
  std::vector<fs::path> files;
  if (fs::is_directory(nvd)) {
    for (const auto& entry : fs::directory_iterator(nvd))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(nvd);
  }
  return files;
}

struct ThreatCache {
  std::vector<ThreatRecord> records;
  std::vector<ThreatDocument> documents;
};

std::string serialize_threat_cache(const ThreatCache& tc, ThreatFormat format) {
  json docs = json::array();
  for (const auto& d : tc.documents)
    docs.push_back({{"threat_id", d.threat_id},
                    {"summary", d.summary},
                    {"embedding", d.embedding ? json(d.embedding->vector) : json(nullptr)},
                    {"provider_tag", d.embedding ? d.embedding->provider_tag : std::string{}}});
  return detail::wrap_cache("threats", {{"source", serialize_threats(tc.records, format)}, {"documents", docs}});
}

ThreatCache deserialize_threat_cache(std::string_view bytes, ThreatFormat format) {
  const json data = detail::unwrap_cache(bytes, "threats");
  try {
    ThreatCache tc;
    tc.records = parse_threats(data.at("source").get<std::string>(), format);
    for (const auto& d : data.at("documents")) {
      ThreatDocument doc{d.at("threat_id").get<std::string>(), d.at("summary").get<std::string>(), std::nullopt};
      if (!d.at("embedding").is_null())
        doc.embedding = Embedding{d.at("embedding").get<std::vector<double>>(), d.at("provider_tag").get<std::string>()};
      tc.documents.push_back(std::move(doc));
    }
    if (tc.documents.size() != tc.records.size()) throw ParseError("threats cache", "record/document count mismatch");
    return tc;
  } catch (const json::exception& e) {
    throw ParseError("threats cache", e.what());
  }
}

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = n;
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ThreatOutcome {
  std::vector<MappingResult> ttm;
  std::vector<MappingResult> tcm;
  std::vector<std::string> messages;
};

std::shared_ptr<EmbeddingProvider> make_provider(const PipelineConfig& c) {
  if (c.provider == ProviderKind::service)
    return std::make_shared<ServiceProvider>(ServiceOptions{c.endpoint, c.batch_cap, 60});
  return std::make_shared<BaselineProvider>();
}

PipelineOutcome execute(const PipelineConfig& config, std::shared_ptr<EmbeddingProvider> provider_override,
                        std::optional<Date> delta_since) {
  PipelineOutcome outcome;
  RunManifest& manifest = outcome.reports.manifest;
  manifest.started = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  manifest.delta_since = delta_since;

  try {
    validate(config);
  } catch (const ValidationError& e) {
    outcome.exit_code = kExitUsage;
    outcome.messages.push_back(std::string("error: ") + e.what());
    return outcome;
  }

  Context ctx{config, outcome, config.cache_dir.empty() ? config.out / ".orca-cache" : config.cache_dir};
  try {
    // Corpora.
    const std::string capec_bytes = read_file(config.capec);
    const std::string capec_hash = sha256_hex(capec_bytes);
    const CapecCorpus capec = cached<CapecCorpus>(
        ctx, "capec", capec_hash, [&] { return load_capec(capec_bytes); },
        [](const CapecCorpus& s) { return serialize_cache(s); }, [](std::string_view b) { return deserialize_capec_cache(b); });
    manifest.corpus_hashes["capec"] = capec_hash;
    manifest.snapshot_dates["capec"] = capec.snapshot_date;
    if (!capec.dangling.empty())
      ctx.note(std::to_string(capec.dangling.size()) + " dangling CAPEC references skipped");

    AttackCorpus attack;
    if (!config.attack.empty()) {
      const std::string attack_bytes = read_file(config.attack);
      std::string fight_bytes;
      std::string attack_hash = sha256_hex(attack_bytes);
      manifest.corpus_hashes["attack"] = attack_hash;
      if (!config.fight.empty()) {
        fight_bytes = read_file(config.fight);
        manifest.corpus_hashes["fight"] = sha256_hex(fight_bytes);
        attack_hash = sha256_hex(attack_hash + manifest.corpus_hashes["fight"]);
      }
      attack = cached<AttackCorpus>(
          ctx, config.fight.empty() ? "attack" : "attack-fight", attack_hash,
          [&] {
            AttackCorpus a = load_attack(attack_bytes);
            if (fight_bytes.empty()) return a;
            FightResult fr = prepare_fight(fight_bytes, std::move(a));
            ctx.note("FiGHT: " + std::to_string(fr.report.total) + " techniques, " + std::to_string(fr.report.excluded) +
                     " excluded, " + std::to_string(fr.report.enriched) + " enriched");
            for (auto& w : fr.report.warnings) ctx.note("FiGHT: " + w);
            return std::move(fr.corpus);
          },
          [](const AttackCorpus& s) { return serialize_cache(s); },
          [](std::string_view b) { return deserialize_attack_cache(b); });
      manifest.snapshot_dates["attack"] = attack.snapshot_date;
      for (const auto& w : attack.warnings) ctx.note("ATT&CK: " + w);
    }

    std::vector<std::string> feed_docs;
    std::string feed_hashes;
    for (const auto& f : nvd_files(config.nvd)) {
      feed_docs.push_back(read_file(f));
      feed_hashes += sha256_hex(feed_docs.back());
    }
    const std::string nvd_hash = sha256_hex(feed_hashes);
    const NvdStore nvd = cached<NvdStore>(
        ctx, "nvd", nvd_hash, [&] { return load_nvd(feed_docs); }, [](const NvdStore& s) { return serialize_cache(s); },
        [](std::string_view b) { return deserialize_nvd_cache(b); });
    manifest.corpus_hashes["nvd"] = nvd_hash;
    manifest.snapshot_dates["nvd"] = nvd.snapshot_date;
    if (nvd.skipped) ctx.note("NVD: " + std::to_string(nvd.skipped) + " malformed entries skipped");

    // Threat preprocessing.
    auto base_provider = provider_override ? provider_override : make_provider(config);
    auto provider = std::make_shared<CachingProvider>(base_provider);
    const std::string threat_bytes = read_file(config.threats);
    const std::string threat_hash = sha256_hex(threat_bytes);
    manifest.corpus_hashes["threats"] = threat_hash;
    const ThreatFormat format = config.format;
    ThreatCache threats = cached<ThreatCache>(
        ctx, "threats", sha256_hex(threat_hash + base_provider->tag()),
        [&] {
          ThreatCache tc;
          tc.records = parse_threats(threat_bytes, format);
          for (const auto& r : tc.records) {
            ThreatDocument doc = synthesize_summary(r);
            doc.embedding = provider->embed(doc.summary, doc.threat_id);
            tc.documents.push_back(std::move(doc));
          }
          return tc;
        },
        [format](const ThreatCache& tc) { return serialize_threat_cache(tc, format); },
        [format](std::string_view b) { return deserialize_threat_cache(b, format); });

    // Mapping.
    MappingOptions options{config.threshold, config.filter, config.domain, config.preselect};
    std::vector<std::shared_ptr<TacticClassifier>> classifiers;
    if (runs_ttm(config)) {
      classifiers.push_back(std::make_shared<BaselineClassifier>(attack, std::min(config.top_k, attack.tactics.size()), provider));
      if (config.provider == ProviderKind::service && !provider_override)
        classifiers.push_back(std::make_shared<ServiceClassifier>(config.endpoint));
    }

    std::vector<ThreatOutcome> per_threat(threats.records.size());
    parallel_for(threats.records.size(), config.workers, [&](std::size_t i) {
      const ThreatRecord& record = threats.records[i];
      const ThreatDocument& doc = threats.documents[i];
      ThreatOutcome& out = per_threat[i];
      if (runs_ttm(config)) {
        try {
          TacticCandidateSet tactics = classify_tactics(doc, classifiers, attack, *provider);
          for (auto& w : tactics.warnings) out.messages.push_back(std::move(w));
          out.ttm = map_ttm(doc, record.title, tactics, attack, options, *provider);
        } catch (const EmptyCandidatePoolError& e) {
          out.messages.push_back(std::string("TTM: ") + e.what());
        } catch (const ValidationError& e) {
          out.messages.push_back(std::string("TTM: ") + e.what());
        }
      }
      if (runs_tcm(config)) {
        try {
          out.tcm = map_tcm(doc, record.title, capec, options, *provider);
        } catch (const EmptyCandidatePoolError& e) {
          out.messages.push_back(std::string("TCM: ") + e.what());
        }
      }
    });

    // Extraction, scoring and reports.
    ReportSet& reports = outcome.reports;
    reports.cvss_version = config.scan.cvss_version;
    std::vector<std::string> threat_ids;
    for (const auto& r : threats.records) threat_ids.push_back(r.threat_id);

    std::vector<Branch> branches;
    if (runs_ttm(config)) branches.push_back(Branch::TTM);
    if (runs_tcm(config)) branches.push_back(Branch::TCM);
    for (auto& t : per_threat)
      for (auto& m : t.messages) ctx.note(std::move(m));

    for (Branch branch : branches) {
      std::vector<MappingResult> mappings;
      for (const auto& t : per_threat) {
        const auto& src = branch == Branch::TTM ? t.ttm : t.tcm;
        mappings.insert(mappings.end(), src.begin(), src.end());
      }
      ExtractionResult extraction = extract_rows(mappings, attack, capec, nvd, config.scan);
      for (auto& w : extraction.report.warnings) ctx.note(std::move(w));

      std::map<std::string, std::vector<ExtractionRow>> by_threat;
      for (const auto& row : extraction.rows) by_threat[row.threat_id].push_back(row);
      for (const auto& record : threats.records) {
        const auto& rows = by_threat[record.threat_id];
        ScoreRow score{branch, record.title, score_threat(record.threat_id, rows, config.scan.cvss_version), std::nullopt};
        if (record.severity && record.likelihood) score.risk = qualitative_risk(*record.severity, *record.likelihood);
        reports.scores.push_back(std::move(score));
        std::set<std::string> cves;
        for (const auto& row : rows) cves.insert(row.cve_id);
        manifest.counts[std::string(to_string(branch))][record.threat_id] = {rows.size(), cves.size()};
      }
      reports.mappings.insert(reports.mappings.end(), mappings.begin(), mappings.end());
      reports.extraction[branch] = std::move(extraction.rows);
    }

    static const std::vector<ExtractionRow> kNoRows;
    const auto ttm_rows = reports.extraction.find(Branch::TTM);
    if (!attack.tactics.empty()) {
      reports.heatmap = build_heatmap({threat_ids, reports.mappings, &attack, config.heatmap_mode,
                                       ttm_rows == reports.extraction.end() ? kNoRows : ttm_rows->second, &capec,
                                       config.scan.mode});
      for (const auto& w : reports.heatmap.warnings) ctx.note("heatmap: " + w);
    } else {
      reports.heatmap.rows = threat_ids;
      std::sort(reports.heatmap.rows.begin(), reports.heatmap.rows.end(), IdLess{});
      reports.heatmap.cells.assign(reports.heatmap.rows.size(), {});
    }

    manifest.config = describe(config);
    manifest.provider_tag = base_provider->tag();
    if (auto* service = dynamic_cast<ServiceProvider*>(base_provider.get()))
      for (auto& w : service->warnings()) ctx.note(std::move(w));
    manifest.warnings = outcome.messages;
    manifest.finished = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());

    outcome.files = emit_reports(reports, config.out,
                                 {ReportFormat::csv, ReportFormat::json, ReportFormat::heatmap_matrix}, config.heatmap_mode);
  } catch (const ValidationError& e) {
    outcome.exit_code = kExitUsage;
    outcome.messages.push_back(std::string("error: ") + e.what());
    return outcome;
  } catch (const std::exception& e) {
    outcome.exit_code = kExitRuntime;
    outcome.messages.push_back(std::string("error: ") + e.what());
    return outcome;
  }

  if (config.gate && gate_trips(*config.gate, outcome.reports.scores)) {
    outcome.exit_code = kExitGate;
    outcome.messages.push_back("gate failed: some threat's " + std::string(to_string(config.gate->metric)) +
                               " band is at or above " + std::string(to_string(config.gate->band_at_or_above)));
  }
  return outcome;
}

}  // namespace

PipelineOutcome run_pipeline(const PipelineConfig& config, std::shared_ptr<EmbeddingProvider> provider) {
  return execute(config, std::move(provider), std::nullopt);
}

PipelineOutcome incremental_scan(PipelineConfig config, const fs::path& last_manifest,
                                 std::shared_ptr<EmbeddingProvider> provider) {
  RunManifest last;
  try {
    last = parse_manifest(read_file(last_manifest));
  } catch (const Error& e) {
    PipelineOutcome outcome;
    outcome.exit_code = kExitRuntime;
    outcome.messages.push_back(std::string("error: cannot use previous manifest: ") + e.what());
    return outcome;
  }
  config.scan.tau = std::max(kEarliestDate, std::chrono::floor<std::chrono::days>(last.finished));
  return execute(config, std::move(provider), config.scan.tau);
}

}  // namespace orca
