// Release gate: each criterion prints one PASS/FAIL line; the exit status is non-zero
// when any of them fails. Oracles come from tests/support and never call the code they check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "orca/extraction.hpp"
#include "orca/mapping.hpp"
#include "orca/pipeline.hpp"
#include "orca/report.hpp"
#include "orca/scoring.hpp"
#include "orca/semsim.hpp"
#include "orca/threatmodel.hpp"
#include "orca/util.hpp"
#include "support.hpp"

using namespace orca;
namespace ot = orca::testing;

namespace {

/// Collects the first few failure reasons of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 3) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const {
    return failures_ > 3 ? detail_ + "; +" + std::to_string(failures_ - 3) + " more" : detail_;
  }

 private:
  int failures_ = 0;
  std::string detail_;
};

std::string fmt(double v, int digits = 12) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// --- criteria ----------------------------------------------------------------------------

std::string template_fidelity(Check& c) {
  const auto records = parse_threats(read_file(ot::fixture("tgen02.json")), ThreatFormat::json);
  c.expect(records.size() == 1, "expected one threat record");
  if (records.empty()) return {};
  const std::string summary = synthesize_summary(records[0]).summary;
  // The printed summary elides the middle of the description; both visible ends must match.
  const std::string prefix =
      "A Threat with the title Malicious access to exposed services using valid accounts and the description Access "
      "to valid accounts to use the O-Cloud services is often a requirement, which";
  const std::string suffix =
      "this may include an exposed Docker API, Kubernetes API server, kubelet, or web application such as the "
      "Kubernetes dashboard.";
  c.expect(summary.starts_with(prefix), "prefix differs");
  c.expect(summary.ends_with(suffix), "suffix differs");
  return "exact prefix/suffix match, " + std::to_string(summary.size()) + " chars";
}

std::string cosine_suite(Check& c) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(2, 512);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  double worst = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t d = dim(rng);
    std::vector<double> a(d), b(d);
    for (auto& x : a) x = gauss(rng);
    for (auto& x : b) x = gauss(rng);
    // Orthogonal companion of a via one Gram-Schmidt step.
    std::vector<double> o(b);
    double ab = 0, aa = 0;
    for (std::size_t i = 0; i < d; ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
    }
    for (std::size_t i = 0; i < d; ++i) o[i] -= ab / aa * a[i];
    std::vector<double> neg(a), scaled(a);
    const double k = scale(rng);
    for (auto& x : neg) x = -x;
    for (auto& x : scaled) x *= k;

    const double ref = static_cast<double>(ot::reference_cosine(a, b));
    const double deviations[] = {std::fabs(cosine(a, a) - 1.0),
                                 std::fabs(cosine(a, o) - static_cast<double>(ot::reference_cosine(a, o))),
                                 std::fabs(cosine(a, o)),
                                 std::fabs(cosine(a, neg) + 1.0),
                                 std::fabs(cosine(a, b) - cosine(b, a)),
                                 std::fabs(cosine(scaled, b) - cosine(a, b)),
                                 std::fabs(cosine(a, b) - ref)};
    for (double dev : deviations) {
      worst = std::max(worst, dev);
      c.expect(dev <= 1e-9, "pair " + std::to_string(pair) + " deviates by " + fmt(dev));
    }
  }
  return "1000 pairs, max deviation " + fmt(worst, 3);
}

std::string filter_semantics(Check& c) {
  // 100 threats, 50 CAPEC candidates, random 16-d embeddings served from a table.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto vec = [&] {
    std::vector<double> v(16);
    for (auto& x : v) x = gauss(rng);
    return v;
  };
  std::map<std::string, std::vector<double>> table;
  CapecCorpus capec;
  for (int i = 1; i <= 50; ++i) {
    const std::string id = "CAPEC-" + std::to_string(i), text = "pattern text " + std::to_string(i);
    capec.patterns.emplace(id, AttackPattern{id, id, text, {}, {}, {}, false});
    table[text] = vec();
  }
  std::vector<ThreatDocument> threats;
  for (int t = 0; t < 100; ++t) {
    const std::string summary = "threat summary " + std::to_string(t);
    table[summary] = vec();
    threats.push_back({"T-" + std::to_string(t), summary, std::nullopt});
  }
  ot::TableProvider provider(table);
  CachingProvider cached(std::shared_ptr<EmbeddingProvider>(&provider, [](EmbeddingProvider*) {}));

  const double thresholds[] = {0.0, 0.2, 0.3, 0.4, 0.45, 0.55, 0.7};
  std::size_t hfc_total = 0;
  for (const auto& doc : threats) {
    std::size_t previous = SIZE_MAX;
    for (double thr : thresholds) {
      MappingOptions hard{thr, FilterCriterion::HFC, "enterprise-attack", Preselect::psi};
      MappingOptions soft{thr, FilterCriterion::SFC, "enterprise-attack", Preselect::psi};
      const auto h = map_tcm(doc, "t", capec, hard, cached);
      const auto s = map_tcm(doc, "t", capec, soft, cached);
      std::set<std::string> soft_ids;
      for (const auto& r : s) soft_ids.insert(r.target_id);
      for (const auto& r : h) c.expect(soft_ids.contains(r.target_id), doc.threat_id + ": HFC result missing from SFC");
      c.expect(!s.empty(), doc.threat_id + ": SFC returned nothing");
      c.expect(h.size() <= previous, doc.threat_id + ": HFC count grew with the threshold");
      // Brute-force count of candidates at or above the threshold.
      std::size_t expected = 0;
      for (const auto& [id, p] : capec.patterns)
        expected += static_cast<double>(ot::reference_cosine(table.at(doc.summary), table.at(p.description))) >= thr;
      c.expect(h.size() == expected, doc.threat_id + ": HFC admitted " + std::to_string(h.size()) + " not " +
                                         std::to_string(expected));
      previous = h.size();
      hfc_total += h.size();
    }
  }
  return "100 threats x 50 candidates x 7 thresholds, " + std::to_string(hfc_total) + " HFC mappings";
}

std::string deep_scan_oracle(Check& c) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(5, 100);
  std::size_t graphs = 0, largest = 0;
  for (int i = 0; i < 220; ++i) {
    const bool cyclic = i >= 200;
    const std::size_t n = size(rng);
    auto g = ot::random_capec_graph(rng, n, cyclic);
    std::uniform_int_distribution<std::size_t> pick(1, n);
    std::set<std::string> seeds;
    for (int k = 0; k < 3; ++k) seeds.insert("CAPEC-" + std::to_string(pick(rng)));
    const CapecSet seed_set(seeds.begin(), seeds.end());
    const CapecSet deep = expand_capecs(seed_set, g.corpus, ScanMode::Deep);
    const CapecSet normal = expand_capecs(seed_set, g.corpus, ScanMode::Normal);
    const auto want = ot::reference_deep_scan(seeds, g.parent_of, g.can_precede);
    c.expect(std::set<std::string>(deep.begin(), deep.end()) == want,
             std::string(cyclic ? "cyclic" : "acyclic") + " graph " + std::to_string(i) + " differs from reachability");
    c.expect(std::includes(deep.begin(), deep.end(), normal.begin(), normal.end(), IdLess{}),
             "graph " + std::to_string(i) + ": Deep is not a superset of Normal");
    largest = std::max(largest, deep.size());
    ++graphs;
  }
  return std::to_string(graphs) + " graphs (200 DAG, 20 cyclic), largest expansion " + std::to_string(largest);
}

NvdStore store_of(const std::vector<VulnerabilityRecord>& records) {
  NvdStore s;
  for (const auto& r : records) s.records.emplace(r.cve_id, r);
  s.index = build_cwe_index(s.records);
  return s;
}

std::string omega_tau(Check& c) {
  const auto tcm = [](const std::string& threat, const std::string& capec) {
    return MappingResult{threat, "enterprise-attack", "t", capec, 0.6, Branch::TCM, AdmittedBy::threshold};
  };
  // Two CAPECs share one CWE that has one CVE: two paths, one distinct CVE.
  CapecCorpus capec;
  capec.patterns.emplace("CAPEC-1", AttackPattern{"CAPEC-1", "a", "a", {}, {}, {"CWE-79"}, false});
  capec.patterns.emplace("CAPEC-2", AttackPattern{"CAPEC-2", "b", "b", {}, {}, {"CWE-79"}, false});
  VulnerabilityRecord v{"CVE-2020-0001", {"CWE-79"}, *parse_timestamp("2020-05-05T00:00:00Z"), BaseScoreMetrics{5, 5, 5}, {}, {}};
  const NvdStore one = store_of({v});
  const std::vector<MappingResult> both{tcm("T-1", "CAPEC-1"), tcm("T-1", "CAPEC-2")};
  ScanConfig scan;
  const std::size_t without = extract_rows(both, {}, capec, one, scan).rows.size();
  scan.omega = true;
  const std::size_t with = extract_rows(both, {}, capec, one, scan).rows.size();
  c.expect(without == 2, "omega=false gave " + std::to_string(without) + " rows");
  c.expect(with == 1, "omega=true gave " + std::to_string(with) + " rows");

  // τ on the fixture feeds: 2024-01-01 drops CVE-2017-16757.
  const CapecCorpus fixture_capec = load_capec(read_file(ot::fixture("capec.json")));
  const std::vector<std::string> feeds{read_file(ot::fixture("nvd/nvdcve-1.1-2017.json")),
                                       read_file(ot::fixture("nvd/nvdcve-2.0-recent.json"))};
  const NvdStore nvd = load_nvd(feeds);
  const std::vector<MappingResult> aal{tcm("T-AAL-01", "CAPEC-122")};
  auto contains = [](const std::vector<ExtractionRow>& rows, const std::string& id) {
    return std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.cve_id == id; });
  };
  ScanConfig late;
  c.expect(contains(extract_rows(aal, {}, fixture_capec, nvd, late).rows, "CVE-2017-16757"),
           "CVE-2017-16757 missing at default tau");
  late.tau = *parse_date("2024-01-01");
  c.expect(!contains(extract_rows(aal, {}, fixture_capec, nvd, late).rows, "CVE-2017-16757"),
           "CVE-2017-16757 survives tau=2024-01-01");

  // Randomized: unique ≤ total and later τ never adds rows.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cwe(1, 8), year(1999, 2025), node(1, 30);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = ot::random_capec_graph(rng, 30, trial % 2 == 1);
    for (auto& [id, p] : g.corpus.patterns)
      for (int k = static_cast<int>(rng() % 3); k > 0; --k) p.related_cwes.push_back("CWE-" + std::to_string(cwe(rng)));
    std::vector<VulnerabilityRecord> records;
    for (int i = 0; i < 60; ++i)
      records.push_back({"CVE-2001-" + std::to_string(1000 + i),
                         {"CWE-" + std::to_string(cwe(rng))},
                         std::chrono::sys_days{std::chrono::year{year(rng)} / 3 / 3},
                         BaseScoreMetrics{1, 2, 3},
                         {},
                         {}});
    const NvdStore s = store_of(records);
    std::vector<MappingResult> maps;
    for (int t = 0; t < 3; ++t)
      for (int k = 0; k < 4; ++k) maps.push_back(tcm("T-" + std::to_string(t), "CAPEC-" + std::to_string(node(rng))));
    for (ScanMode mode : {ScanMode::Normal, ScanMode::Deep}) {
      ScanConfig cfg;
      cfg.mode = mode;
      const std::size_t total = extract_rows(maps, {}, g.corpus, s, cfg).rows.size();
      cfg.omega = true;
      const std::size_t unique = extract_rows(maps, {}, g.corpus, s, cfg).rows.size();
      c.expect(unique <= total, "unique count exceeds total");
      cfg.omega = false;
      std::size_t previous = total;
      for (int y = 1999; y <= 2026; ++y) {
        cfg.tau = std::chrono::sys_days{std::chrono::year{y} / 1 / 1};
        const std::size_t rows = extract_rows(maps, {}, g.corpus, s, cfg).rows.size();
        c.expect(rows <= previous, "tau " + std::to_string(y) + " added rows");
        previous = rows;
      }
    }
  }
  return "fixture 2 -> 1 rows, tau 2024 excludes CVE-2017-16757, 50 randomized worlds";
}

std::string scoring(Check& c) {
  auto row = [](double i, double e, double b) { return ExtractionRow{"T-GEN-02", "CVE", "CWE", "CAPEC", i, e, b, {}}; };
  const std::vector<ExtractionRow> rows{row(6.4, 3.9, 4.6), row(6.4, 8.0, 6.5), row(10.0, 3.9, 7.2), row(6.4, 10.0, 7.5)};
  const ThreatScore s = score_threat("T-GEN-02", rows, CvssVersion::v2);
  // Hand-computed means: 29.2/4 = 7.30, 25.8/4 = 6.45, 25.8/4 = 6.45.
  const std::string got = s.scoreable() ? format_fixed(*s.avg_impact, 2) + "/" + format_fixed(*s.avg_exploitability, 2) +
                                              "/" + format_fixed(*s.avg_base, 2)
                                        : "unscoreable";
  c.expect(got == "7.30/6.45/6.45", "averages " + got);
  const ThreatScore empty = score_threat("T-RADIO-01", std::vector<ExtractionRow>{}, CvssVersion::v2);
  c.expect(!empty.scoreable() && !empty.avg_base, "empty row set is scoreable");
  c.expect(band(7.9) == Band::High, "band(7.9)");
  c.expect(band(5.3) == Band::Medium, "band(5.3)");
  c.expect(band(0.0) == Band::Low, "band(0)");
  Band previous = Band::Low;
  for (int i = 0; i <= 10000; ++i) {
    const Band b = band(i / 1000.0);
    c.expect(b >= previous, "band not monotone at " + fmt(i / 1000.0));
    previous = b;
  }
  return "averages " + got + ", bands 7.9=High 5.3=Medium, monotone over [0,10]";
}

std::string determinism(Check& c) {
  ot::TempDir a("orca-accept-a"), b("orca-accept-b");
  auto config = [](const std::filesystem::path& out) {
    PipelineConfig cfg;
    cfg.threats = ot::fixture("threats.json");
    cfg.capec = ot::fixture("capec.json");
    cfg.attack = ot::fixture("attack.json");
    cfg.fight = ot::fixture("fight.yaml");
    cfg.nvd = ot::fixture("nvd");
    cfg.branch = BranchSelection::both;
    cfg.out = out;
    return cfg;
  };
  const auto first = run_pipeline(config(a.path()));
  const auto second = run_pipeline(config(b.path()));
  c.expect(first.exit_code == kExitOk && second.exit_code == kExitOk, "pipeline did not finish");
  if (!c.ok()) return {};
  std::string hashes;
  for (const char* f : {"scores.csv", "mappings.txt", "heatmap.csv"}) {
    const std::string x = read_file(a / f), y = read_file(b / f);
    c.expect(x == y, std::string(f) + " differs between runs");
    hashes += std::string(hashes.empty() ? "" : ", ") + f + " " + sha256_hex(x).substr(0, 12);
  }
  return hashes;
}

std::string heatmap(Check& c) {
  std::mt19937_64 rng(8);
  const AttackCorpus attack = ot::fourteen_tactic_corpus(rng, 60);
  c.expect(attack.tactics.size() == 14, "fixture lacks 14 tactics");
  std::map<std::string, std::vector<std::string>> table;
  for (const auto& [id, t] : attack.techniques) table[id] = t.tactic_ids;
  const std::vector<std::string> threats{"T-1", "T-2", "T-3", "T-4", "T-5"};
  std::uniform_int_distribution<int> technique(0, 59), threat(0, 4);
  std::vector<MappingResult> mappings;
  for (int i = 0; i < 120; ++i)
    mappings.push_back({threats[threat(rng)], "enterprise-attack", "t", "T" + std::to_string(1000 + technique(rng)), 0.6,
                        i % 7 == 0 ? Branch::TCM : Branch::TTM, AdmittedBy::threshold});
  const TacticHeatmap h = build_heatmap({threats, mappings, &attack});
  const auto expected = ot::reference_heatmap_counts(mappings, table);
  double total = 0;
  c.expect(h.rows == threats, "row labels differ");
  c.expect(h.columns.size() == 14, "column count differs");
  for (const auto& r : h.rows)
    for (const auto& col : h.columns) {
      const auto it = expected.find({r, col});
      const double want = it == expected.end() ? 0.0 : it->second;
      c.expect(h.cell(r, col) == want, r + "/" + col + " is " + fmt(h.cell(r, col)) + " not " + fmt(want));
      total += h.cell(r, col);
    }
  return "5 x 14 cells, total " + fmt(total);
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string(Check&)> run;
  };
  const Criterion criteria[] = {{"template-fidelity", template_fidelity}, {"cosine-suite", cosine_suite},
                                {"filter-semantics", filter_semantics},   {"deep-scan-oracle", deep_scan_oracle},
                                {"omega-tau-filters", omega_tau},         {"scoring", scoring},
                                {"determinism", determinism},             {"heatmap", heatmap}};
  int failed = 0;
  for (const auto& criterion : criteria) {
    Check check;
    std::string summary;
    const auto start = std::chrono::steady_clock::now();
    try {
      summary = criterion.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = check.ok();
    failed += !ok;
    std::printf("%s %-18s %6.2fs  %s\n", ok ? "PASS" : "FAIL", criterion.name, seconds,
                ok ? summary.c_str() : check.detail().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
