#include "orca/corpus.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <unordered_map>
#include <unordered_set>

#include "cache_codec.hpp"
#include "orca/error.hpp"
#include "orca/util.hpp"

namespace orca {

using nlohmann::json;

namespace {

json parse_json_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what, std::string("invalid JSON: ") + e.what());
  }
}

const json& bundle_objects(const json& root, const std::string& what) {
  if (!root.is_object() || !root.contains("objects") || !root["objects"].is_array())
    throw ParseError(what, "not a STIX bundle (missing \"objects\" array)");
  return root["objects"];
}

std::string string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(obj.value("id", std::string{}), std::string("field ") + key + " is not a string");
  return it->get<std::string>();
}

bool bool_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && it->is_boolean() && it->get<bool>();
}

std::string object_id(const json& obj, std::size_t index) {
  auto it = obj.find("id");
  if (it == obj.end() || !it->is_string()) throw ParseError("objects[" + std::to_string(index) + "]", "missing STIX id");
  return it->get<std::string>();
}

/// external_id of the first reference whose source_name matches.
std::string external_id(const json& obj, std::string_view source) {
  auto it = obj.find("external_references");
  if (it == obj.end() || !it->is_array()) return {};
  for (const auto& ref : *it) {
    if (ref.is_object() && ref.value("source_name", std::string{}) == source && ref.contains("external_id") &&
        ref["external_id"].is_string())
      return ref["external_id"].get<std::string>();
  }
  return {};
}

std::vector<std::string> external_ids(const json& obj, std::string_view source) {
  std::vector<std::string> out;
  auto it = obj.find("external_references");
  if (it == obj.end() || !it->is_array()) return out;
  for (const auto& ref : *it) {
    if (ref.is_object() && ref.value("source_name", std::string{}) == source && ref.contains("external_id") &&
        ref["external_id"].is_string())
      out.push_back(ref["external_id"].get<std::string>());
  }
  return out;
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(obj.value("id", std::string{}), std::string("field ") + key + " is not a list");
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(obj.value("id", std::string{}), std::string("field ") + key + " holds a non-string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void note_modified(const json& obj, std::string& newest) {
  auto it = obj.find("modified");
  if (it == obj.end() || !it->is_string()) return;
  auto ts = parse_timestamp(it->get<std::string>());
  if (!ts) return;
  auto date = format_date(std::chrono::floor<std::chrono::days>(*ts));
  if (date > newest) newest = date;
}

void push_unique(std::vector<std::string>& v, std::string s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
}

}  // namespace

// ---------------------------------------------------------------------------

const AttackPattern* CapecCorpus::find(std::string_view capec_id) const {
  auto it = patterns.find(capec_id);
  return it == patterns.end() ? nullptr : &it->second;
}

const AttackPattern& CapecCorpus::lookup(std::string_view capec_id) const {
  if (const auto* p = find(capec_id)) return *p;
  throw LookupError(std::string(capec_id));
}

std::size_t CapecCorpus::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(patterns.begin(), patterns.end(), [](const auto& kv) { return !kv.second.deprecated; }));
}

CapecCorpus load_capec(std::string_view stix_document) {
  const json root = parse_json_document(stix_document, "capec bundle");
  const json& objects = bundle_objects(root, "capec bundle");

  struct Pending {
    std::string capec_id;
    std::vector<std::string> parent_refs;
    std::vector<std::string> precede_refs;
  };
  CapecCorpus corpus;
  std::unordered_map<std::string, std::string> stix_to_capec;
  std::vector<Pending> pending;

  for (std::size_t i = 0; i < objects.size(); ++i) {
    const json& obj = objects[i];
    if (!obj.is_object()) throw ParseError("objects[" + std::to_string(i) + "]", "not an object");
    if (obj.value("type", std::string{}) != "attack-pattern") continue;
    const std::string sid = object_id(obj, i);

    AttackPattern p;
    p.capec_id = external_id(obj, "capec");
    if (p.capec_id.empty()) throw ParseError(sid, "attack-pattern without a capec external_id");
    p.name = string_field(obj, "name");
    if (p.name.empty()) throw ParseError(sid, "attack-pattern without a name");
    p.description = string_field(obj, "description");
    for (auto& cwe : external_ids(obj, "cwe"))
      if (is_cwe_id(cwe)) push_unique(p.related_cwes, std::move(cwe));
    std::sort(p.related_cwes.begin(), p.related_cwes.end(), IdLess{});
    const std::string status = string_field(obj, "x_capec_status");
    p.deprecated = status == "Deprecated" || status == "Obsolete" || bool_field(obj, "revoked") ||
                   bool_field(obj, "x_capec_deprecated");
    note_modified(obj, corpus.snapshot_date);

    if (corpus.patterns.contains(p.capec_id)) throw ParseError(sid, "duplicate " + p.capec_id);
    stix_to_capec.emplace(sid, p.capec_id);
    pending.push_back({p.capec_id, string_list(obj, "x_capec_parent_of_refs"), string_list(obj, "x_capec_can_precede_refs")});
    corpus.patterns.emplace(p.capec_id, std::move(p));
  }
  if (corpus.patterns.empty()) throw EmptyCorpusError("CAPEC bundle");

  for (auto& item : pending) {
    AttackPattern& p = corpus.patterns.at(item.capec_id);
    auto resolve = [&](const std::vector<std::string>& refs, std::vector<std::string>& out, const char* attribute) {
      for (const auto& ref : refs) {
        if (auto it = stix_to_capec.find(ref); it != stix_to_capec.end())
          push_unique(out, it->second);
        else
          corpus.dangling.push_back({item.capec_id, attribute, ref});
      }
    };
    resolve(item.parent_refs, p.parent_of, "parent_of");
    resolve(item.precede_refs, p.can_precede, "can_precede");
  }
  return corpus;
}

// ---------------------------------------------------------------------------

const TechniqueEntry* AttackCorpus::find_technique(std::string_view id) const {
  auto it = techniques.find(id);
  return it == techniques.end() ? nullptr : &it->second;
}

const TacticEntry* AttackCorpus::find_tactic(std::string_view id) const {
  auto it = tactics.find(id);
  return it == tactics.end() ? nullptr : &it->second;
}

AttackCorpus load_attack(std::string_view stix_document) {
  const json root = parse_json_document(stix_document, "attack bundle");
  const json& objects = bundle_objects(root, "attack bundle");

  AttackCorpus corpus;
  std::unordered_map<std::string, std::string> shortname_to_tactic;

  for (std::size_t i = 0; i < objects.size(); ++i) {
    const json& obj = objects[i];
    if (!obj.is_object()) throw ParseError("objects[" + std::to_string(i) + "]", "not an object");
    if (obj.value("type", std::string{}) != "x-mitre-tactic") continue;
    const std::string sid = object_id(obj, i);
    if (bool_field(obj, "revoked") || bool_field(obj, "x_mitre_deprecated")) continue;
    TacticEntry t;
    t.tactic_id = external_id(obj, "mitre-attack");
    if (t.tactic_id.empty()) throw ParseError(sid, "tactic without a mitre-attack external_id");
    t.name = string_field(obj, "name");
    t.description = string_field(obj, "description");
    t.shortname = string_field(obj, "x_mitre_shortname");
    if (t.shortname.empty()) throw ParseError(sid, "tactic without x_mitre_shortname");
    if (corpus.tactics.contains(t.tactic_id)) throw ParseError(sid, "duplicate tactic " + t.tactic_id);
    note_modified(obj, corpus.snapshot_date);
    shortname_to_tactic[t.shortname] = t.tactic_id;
    corpus.tactics.emplace(t.tactic_id, std::move(t));
  }

  bool domain_seen = false;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const json& obj = objects[i];
    if (obj.value("type", std::string{}) != "attack-pattern") continue;
    const std::string sid = object_id(obj, i);
    if (bool_field(obj, "revoked") || bool_field(obj, "x_mitre_deprecated")) continue;

    TechniqueEntry t;
    t.technique_id = external_id(obj, "mitre-attack");
    if (t.technique_id.empty()) throw ParseError(sid, "technique without a mitre-attack external_id");
    t.name = string_field(obj, "name");
    t.description = string_field(obj, "description");
    for (auto& capec : external_ids(obj, "capec")) push_unique(t.capec_ids, std::move(capec));
    std::sort(t.capec_ids.begin(), t.capec_ids.end(), IdLess{});

    if (auto it = obj.find("kill_chain_phases"); it != obj.end()) {
      if (!it->is_array()) throw ParseError(sid, "kill_chain_phases is not a list");
      for (const auto& phase : *it) {
        const std::string name = phase.value("phase_name", std::string{});
        if (auto tac = shortname_to_tactic.find(name); tac != shortname_to_tactic.end())
          push_unique(t.tactic_ids, tac->second);
        else
          corpus.warnings.push_back(t.technique_id + ": unknown tactic phase '" + name + "'");
      }
    }
    std::sort(t.tactic_ids.begin(), t.tactic_ids.end(), IdLess{});
    if (t.tactic_ids.empty()) {
      corpus.warnings.push_back(t.technique_id + ": no resolvable tactic, technique dropped");
      continue;
    }
    if (!domain_seen) {
      auto domains = string_list(obj, "x_mitre_domains");
      if (!domains.empty()) {
        corpus.domain = domains.front();
        domain_seen = true;
      }
    }
    if (corpus.techniques.contains(t.technique_id)) throw ParseError(sid, "duplicate technique " + t.technique_id);
    note_modified(obj, corpus.snapshot_date);
    corpus.techniques.emplace(t.technique_id, std::move(t));
  }
  if (corpus.techniques.empty()) throw EmptyCorpusError("ATT&CK bundle (techniques)");
  if (corpus.tactics.empty()) throw EmptyCorpusError("ATT&CK bundle (tactics)");
  return corpus;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> yaml_strings(const YAML::Node& node) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (node.IsScalar()) {
    out.push_back(node.as<std::string>());
  } else if (node.IsSequence()) {
    for (const auto& item : node)
      if (item.IsScalar()) out.push_back(item.as<std::string>());
  }
  return out;
}

std::string yaml_string(const YAML::Node& entry, const char* key) {
  const YAML::Node node = entry[key];
  return node && node.IsScalar() ? node.as<std::string>() : std::string{};
}

/// The ATT&CK id this FiGHT entry declares itself an addendum of, or empty.
std::string fight_cross_reference(const YAML::Node& entry, const std::string& fight_id) {
  for (const char* key : {"attack-id", "attack_id", "attack-technique"}) {
    if (auto ref = yaml_string(entry, key); !ref.empty()) return ref;
  }
  const std::string typecode = yaml_string(entry, "typecode");
  if (typecode.find("attack") != std::string::npos && typecode.find("addendum") != std::string::npos &&
      fight_id.starts_with("FG"))
    return fight_id.substr(2);
  return {};
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

FightResult prepare_fight(std::string_view fight_yaml, AttackCorpus attack) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(fight_yaml));
  } catch (const YAML::Exception& e) {
    throw ParseError("fight", std::string("invalid YAML: ") + e.what());
  }
  YAML::Node entries = root.IsMap() ? root["techniques"] : root;
  if (!entries || !entries.IsSequence()) throw ParseError("fight", "expected a 'techniques' list");

  FightResult result;
  FightReport& report = result.report;
  try {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const YAML::Node entry = entries[i];
      if (!entry.IsMap()) throw ParseError("techniques[" + std::to_string(i) + "]", "not a mapping");
      const std::string id = yaml_string(entry, "id");
      if (id.empty()) throw ParseError("techniques[" + std::to_string(i) + "]", "missing id");
      ++report.total;

      const std::string ref = fight_cross_reference(entry, id);
      std::vector<std::string> addenda;
      for (const char* key : {"addendums", "addenda"})
        for (auto& a : yaml_strings(entry[key]))
          if (auto t = trim(std::move(a)); !t.empty()) addenda.push_back(std::move(t));

      auto it = ref.empty() ? attack.techniques.end() : attack.techniques.find(ref);
      if (!ref.empty() && it == attack.techniques.end())
        report.warnings.push_back(id + ": cross-reference to unknown ATT&CK technique " + ref);
      if (it == attack.techniques.end() || addenda.empty()) {
        ++report.excluded;
        report.excluded_ids.push_back(id);
        continue;
      }
      report.addenda_added += addenda.size();
      for (auto& a : addenda) it->second.addenda.push_back(std::move(a));
      ++report.enriched;
    }
  } catch (const YAML::Exception& e) {
    throw ParseError("fight", std::string("invalid YAML content: ") + e.what());
  }
  result.corpus = std::move(attack);
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(CvssVersion v) noexcept {
  switch (v) {
    case CvssVersion::v2: return "v2";
    case CvssVersion::v3: return "v3";
    case CvssVersion::v4: return "v4";
  }
  return "v2";
}

std::optional<CvssVersion> parse_cvss_version(std::string_view text) noexcept {
  if (text == "v2" || text == "2") return CvssVersion::v2;
  if (text == "v3" || text == "3") return CvssVersion::v3;
  if (text == "v4" || text == "4") return CvssVersion::v4;
  return std::nullopt;
}

const std::optional<BaseScoreMetrics>& VulnerabilityRecord::metrics(CvssVersion v) const noexcept {
  switch (v) {
    case CvssVersion::v3: return cvss_v3;
    case CvssVersion::v4: return cvss_v4;
    default: return cvss_v2;
  }
}

const VulnerabilityRecord* NvdStore::find(std::string_view cve_id) const {
  auto it = records.find(cve_id);
  return it == records.end() ? nullptr : &it->second;
}

std::size_t NvdStore::unscoreable_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& kv) { return !kv.second.scoreable(); }));
}

namespace {

struct EntryError {
  std::string message;
};

double score_value(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw EntryError{std::string("missing numeric ") + key};
  const double v = it->get<double>();
  if (!(v >= 0.0 && v <= 10.0)) throw EntryError{std::string(key) + " outside [0,10]"};
  return v;
}

/// {"baseScore" under `data_key`, "impactScore", "exploitabilityScore"} at `metric`.
std::optional<BaseScoreMetrics> metric_block(const json& metric, const char* data_key, bool subscores_required = true) {
  if (!metric.is_object()) return std::nullopt;
  auto data = metric.find(data_key);
  if (data == metric.end() || !data->is_object()) throw EntryError{std::string("missing ") + data_key};
  BaseScoreMetrics m;
  m.base = score_value(*data, "baseScore");
  if (!subscores_required && (!metric.contains("impactScore") || !metric.contains("exploitabilityScore")))
    return std::nullopt;
  m.impact = score_value(metric, "impactScore");
  m.exploitability = score_value(metric, "exploitabilityScore");
  return m;
}

/// NVD 2.0 lists several metric sources; the "Primary" one wins.
const json* primary_metric(const json& metrics, const char* key) {
  auto it = metrics.find(key);
  if (it == metrics.end() || !it->is_array() || it->empty()) return nullptr;
  for (const auto& m : *it)
    if (m.value("type", std::string{}) == "Primary") return &m;
  return &it->front();
}

void add_cwes(const json& problem_list, std::vector<std::string>& cwes) {
  if (!problem_list.is_array()) return;
  for (const auto& block : problem_list) {
    auto desc = block.find("description");
    if (desc == block.end() || !desc->is_array()) continue;
    for (const auto& d : *desc) {
      const std::string value = d.value("value", std::string{});
      if (is_cwe_id(value)) push_unique(cwes, value);
    }
  }
}

Timestamp published_at(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw EntryError{std::string("missing ") + key};
  auto ts = parse_timestamp(it->get<std::string>());
  if (!ts) throw EntryError{"unparseable " + std::string(key)};
  if (*ts < Timestamp{kEarliestDate}) throw EntryError{std::string(key) + " before 1988-01-01"};
  return *ts;
}

bool valid_cve_id(std::string_view id) {
  if (!id.starts_with("CVE-") || id.size() < 13 || id[8] != '-') return false;
  for (std::size_t i = 4; i < id.size(); ++i)
    if (i != 8 && (id[i] < '0' || id[i] > '9')) return false;
  return true;
}

VulnerabilityRecord parse_v11_item(const json& item) {
  VulnerabilityRecord r;
  const json& cve = item.at("cve");
  r.cve_id = cve.at("CVE_data_meta").at("ID").get<std::string>();
  if (!valid_cve_id(r.cve_id)) throw EntryError{"bad id " + r.cve_id};
  if (auto pt = cve.find("problemtype"); pt != cve.end()) add_cwes(pt->value("problemtype_data", json::array()), r.cwe_ids);
  r.published = published_at(item, "publishedDate");
  if (auto impact = item.find("impact"); impact != item.end() && impact->is_object()) {
    if (auto v2 = impact->find("baseMetricV2"); v2 != impact->end()) r.cvss_v2 = metric_block(*v2, "cvssV2");
    if (auto v3 = impact->find("baseMetricV3"); v3 != impact->end()) r.cvss_v3 = metric_block(*v3, "cvssV3");
  }
  return r;
}

VulnerabilityRecord parse_v20_item(const json& item) {
  VulnerabilityRecord r;
  const json& cve = item.at("cve");
  r.cve_id = cve.at("id").get<std::string>();
  if (!valid_cve_id(r.cve_id)) throw EntryError{"bad id " + r.cve_id};
  if (auto w = cve.find("weaknesses"); w != cve.end()) add_cwes(*w, r.cwe_ids);
  r.published = published_at(cve, "published");
  if (auto metrics = cve.find("metrics"); metrics != cve.end() && metrics->is_object()) {
    if (const json* m = primary_metric(*metrics, "cvssMetricV2")) r.cvss_v2 = metric_block(*m, "cvssData");
    if (const json* m = primary_metric(*metrics, "cvssMetricV31"))
      r.cvss_v3 = metric_block(*m, "cvssData");
    else if (const json* m30 = primary_metric(*metrics, "cvssMetricV30"))
      r.cvss_v3 = metric_block(*m30, "cvssData");
    if (const json* m = primary_metric(*metrics, "cvssMetricV40")) r.cvss_v4 = metric_block(*m, "cvssData", false);
  }
  return r;
}

}  // namespace

CweIndex build_cwe_index(const std::map<std::string, VulnerabilityRecord, IdLess>& records) {
  CweIndex index;
  for (const auto& [id, record] : records)
    for (const auto& cwe : record.cwe_ids) index[cwe].insert(id);
  return index;
}

NvdStore load_nvd(std::span<const std::string> feed_documents) {
  NvdStore store;
  std::size_t parsed = 0;
  for (std::size_t doc_index = 0; doc_index < feed_documents.size(); ++doc_index) {
    const std::string label = "feed[" + std::to_string(doc_index) + "]";
    const json root = parse_json_document(feed_documents[doc_index], label);
    const json* items = nullptr;
    bool v20 = false;
    if (root.is_object() && root.contains("CVE_Items") && root["CVE_Items"].is_array()) {
      items = &root["CVE_Items"];
      if (auto ts = root.find("CVE_data_timestamp"); ts != root.end() && ts->is_string())
        if (auto t = parse_timestamp(ts->get<std::string>()))
          store.snapshot_date = std::max(store.snapshot_date, format_date(std::chrono::floor<std::chrono::days>(*t)));
    } else if (root.is_object() && root.contains("vulnerabilities") && root["vulnerabilities"].is_array()) {
      items = &root["vulnerabilities"];
      v20 = true;
      if (auto ts = root.find("timestamp"); ts != root.end() && ts->is_string())
        if (auto t = parse_timestamp(ts->get<std::string>()))
          store.snapshot_date = std::max(store.snapshot_date, format_date(std::chrono::floor<std::chrono::days>(*t)));
    } else {
      throw ParseError(label, "neither an NVD 1.1 feed (CVE_Items) nor an NVD 2.0 document (vulnerabilities)");
    }

    for (std::size_t i = 0; i < items->size(); ++i) {
      try {
        VulnerabilityRecord r = v20 ? parse_v20_item((*items)[i]) : parse_v11_item((*items)[i]);
        std::sort(r.cwe_ids.begin(), r.cwe_ids.end(), IdLess{});
        store.records.insert_or_assign(r.cve_id, std::move(r));
        ++parsed;
      } catch (const EntryError& e) {
        ++store.skipped;
        store.warnings.push_back(label + " entry " + std::to_string(i) + ": " + e.message);
      } catch (const json::exception& e) {
        ++store.skipped;
        store.warnings.push_back(label + " entry " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  if (parsed == 0) throw EmptyCorpusError("NVD feeds");
  store.index = build_cwe_index(store.records);
  return store;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

json to_json(const AttackPattern& p) {
  return {{"capec_id", p.capec_id},     {"name", p.name},
          {"description", p.description}, {"parent_of", p.parent_of},
          {"can_precede", p.can_precede}, {"related_cwes", p.related_cwes},
          {"deprecated", p.deprecated}};
}

AttackPattern pattern_from(const json& j) {
  AttackPattern p;
  p.capec_id = j.at("capec_id").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.description = j.at("description").get<std::string>();
  p.parent_of = j.at("parent_of").get<std::vector<std::string>>();
  p.can_precede = j.at("can_precede").get<std::vector<std::string>>();
  p.related_cwes = j.at("related_cwes").get<std::vector<std::string>>();
  p.deprecated = j.at("deprecated").get<bool>();
  return p;
}

json metrics_json(const std::optional<BaseScoreMetrics>& m) {
  if (!m) return nullptr;
  return json::array({m->impact, m->exploitability, m->base});
}

std::optional<BaseScoreMetrics> metrics_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return BaseScoreMetrics{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

template <typename F>
auto decode(std::string_view bytes, std::string_view kind, F&& build) {
  const json payload = detail::unwrap_cache(bytes, kind);
  try {
    return build(payload);
  } catch (const json::exception& e) {
    throw ParseError(std::string(kind) + " cache", std::string("corrupt payload: ") + e.what());
  }
}

}  // namespace

std::string serialize_cache(const CapecCorpus& corpus) {
  json patterns = json::array();
  for (const auto& [id, p] : corpus.patterns) patterns.push_back(to_json(p));
  json dangling = json::array();
  for (const auto& d : corpus.dangling) dangling.push_back({d.from, d.attribute, d.target});
  return detail::wrap_cache("capec", {{"patterns", patterns}, {"dangling", dangling}, {"snapshot_date", corpus.snapshot_date}});
}

CapecCorpus deserialize_capec_cache(std::string_view bytes) {
  return decode(bytes, "capec", [](const json& j) {
    CapecCorpus c;
    for (const auto& p : j.at("patterns")) {
      auto pattern = pattern_from(p);
      c.patterns.emplace(pattern.capec_id, std::move(pattern));
    }
    for (const auto& d : j.at("dangling"))
      c.dangling.push_back({d.at(0).get<std::string>(), d.at(1).get<std::string>(), d.at(2).get<std::string>()});
    c.snapshot_date = j.at("snapshot_date").get<std::string>();
    return c;
  });
}

std::string serialize_cache(const AttackCorpus& corpus) {
  json techniques = json::array();
  for (const auto& [id, t] : corpus.techniques)
    techniques.push_back({{"id", t.technique_id},
                          {"name", t.name},
                          {"description", t.description},
                          {"tactic_ids", t.tactic_ids},
                          {"capec_ids", t.capec_ids},
                          {"addenda", t.addenda}});
  json tactics = json::array();
  for (const auto& [id, t] : corpus.tactics)
    tactics.push_back({{"id", t.tactic_id}, {"name", t.name}, {"description", t.description}, {"shortname", t.shortname}});
  return detail::wrap_cache("attack", {{"techniques", techniques},
                                       {"tactics", tactics},
                                       {"domain", corpus.domain},
                                       {"snapshot_date", corpus.snapshot_date},
                                       {"warnings", corpus.warnings}});
}

AttackCorpus deserialize_attack_cache(std::string_view bytes) {
  return decode(bytes, "attack", [](const json& j) {
    AttackCorpus c;
    for (const auto& t : j.at("techniques")) {
      TechniqueEntry e{t.at("id").get<std::string>(),
                       t.at("name").get<std::string>(),
                       t.at("description").get<std::string>(),
                       t.at("tactic_ids").get<std::vector<std::string>>(),
                       t.at("capec_ids").get<std::vector<std::string>>(),
                       t.at("addenda").get<std::vector<std::string>>()};
      c.techniques.emplace(e.technique_id, std::move(e));
    }
    for (const auto& t : j.at("tactics")) {
      TacticEntry e{t.at("id").get<std::string>(), t.at("name").get<std::string>(),
                    t.at("description").get<std::string>(), t.at("shortname").get<std::string>()};
      c.tactics.emplace(e.tactic_id, std::move(e));
    }
    c.domain = j.at("domain").get<std::string>();
    c.snapshot_date = j.at("snapshot_date").get<std::string>();
    c.warnings = j.at("warnings").get<std::vector<std::string>>();
    return c;
  });
}

std::string serialize_cache(const NvdStore& store) {
  json records = json::array();
  for (const auto& [id, r] : store.records)
    records.push_back({r.cve_id, r.cwe_ids, r.published.time_since_epoch().count(), metrics_json(r.cvss_v2),
                       metrics_json(r.cvss_v3), metrics_json(r.cvss_v4)});
  return detail::wrap_cache("nvd", {{"records", records},
                                    {"skipped", store.skipped},
                                    {"warnings", store.warnings},
                                    {"snapshot_date", store.snapshot_date}});
}

NvdStore deserialize_nvd_cache(std::string_view bytes) {
  return decode(bytes, "nvd", [](const json& j) {
    NvdStore s;
    for (const auto& r : j.at("records")) {
      VulnerabilityRecord rec;
      rec.cve_id = r.at(0).get<std::string>();
      rec.cwe_ids = r.at(1).get<std::vector<std::string>>();
      rec.published = Timestamp{std::chrono::seconds{r.at(2).get<std::int64_t>()}};
      rec.cvss_v2 = metrics_from(r.at(3));
      rec.cvss_v3 = metrics_from(r.at(4));
      rec.cvss_v4 = metrics_from(r.at(5));
      s.records.emplace(rec.cve_id, std::move(rec));
    }
    s.index = build_cwe_index(s.records);
    s.skipped = j.at("skipped").get<std::size_t>();
    s.warnings = j.at("warnings").get<std::vector<std::string>>();
    s.snapshot_date = j.at("snapshot_date").get<std::string>();
    return s;
  });
}

std::string cache_file_name(std::string_view kind, std::string_view content_hash) {
  return std::string(kind) + "-" + std::string(content_hash.substr(0, 16)) + ".orc";
}

}  // namespace orca
