#include "orca/threatmodel.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "orca/error.hpp"
#include "orca/util.hpp"

namespace orca {

using nlohmann::json;

namespace {

constexpr const char* kId = "Threat ID";
constexpr const char* kTitle = "Threat title";
constexpr const char* kDescription = "Threat Description";
constexpr const char* kAgent = "Threat agent";
constexpr const char* kVulnerability = "Vulnerability";
constexpr const char* kAssets = "Threatened Asset";
constexpr const char* kComponents = "Affected Components";
constexpr const char* kSeverity = "Severity";
constexpr const char* kLikelihood = "Likelihood";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<Level> level_field(const std::string& threat_id, const char* field, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || lower(t) == "none" || t == "-") return std::nullopt;
  if (auto level = parse_level(t)) return level;
  throw ParseError(threat_id, std::string("field '") + field + "' has unknown level '" + t + "'");
}

void check_record(const ThreatRecord& r, std::set<std::string>& seen, std::size_t index) {
  if (r.threat_id.empty()) throw ParseError("entry[" + std::to_string(index) + "]", "missing 'Threat ID'");
  if (r.title.empty()) throw ParseError(r.threat_id, "missing field 'Threat title'");
  if (r.description.empty()) throw ParseError(r.threat_id, "missing field 'Threat Description'");
  if (!seen.insert(r.threat_id).second) throw ParseError(r.threat_id, "duplicate threat id");
}

// ---------------------------------------------------------------------------
// JSON

std::string json_text(const json& obj, const char* key, const std::string& threat_id) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(threat_id, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

TextOrList json_text_or_list(const json& obj, const char* key, const std::string& threat_id) {
  TextOrList out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (it->is_string()) {
    if (auto s = it->get<std::string>(); !s.empty()) out.values.push_back(std::move(s));
    return out;
  }
  if (!it->is_array()) throw ParseError(threat_id, std::string("field '") + key + "' is neither text nor a list");
  out.is_list = true;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(threat_id, std::string("field '") + key + "' holds a non-string");
    out.values.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<ThreatRecord> parse_json(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError("threats", std::string("invalid JSON: ") + e.what());
  }
  if (root.is_object()) root = json::array({root});
  if (!root.is_array()) throw ParseError("threats", "expected an array of threat objects");

  std::vector<ThreatRecord> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& obj = root[i];
    if (!obj.is_object()) throw ParseError("entry[" + std::to_string(i) + "]", "not an object");
    ThreatRecord r;
    r.threat_id = json_text(obj, kId, "entry[" + std::to_string(i) + "]");
    r.title = json_text(obj, kTitle, r.threat_id);
    r.description = json_text(obj, kDescription, r.threat_id);
    r.threat_agent = json_text(obj, kAgent, r.threat_id);
    r.vulnerabilities = json_text_or_list(obj, kVulnerability, r.threat_id);
    r.threatened_assets = json_text_or_list(obj, kAssets, r.threat_id);
    r.affected_components = json_text_or_list(obj, kComponents, r.threat_id);
    r.severity = level_field(r.threat_id, kSeverity, json_text(obj, kSeverity, r.threat_id));
    r.likelihood = level_field(r.threat_id, kLikelihood, json_text(obj, kLikelihood, r.threat_id));
    check_record(r, seen, i);
    out.push_back(std::move(r));
  }
  return out;
}

json to_json_value(const TextOrList& v) {
  if (v.is_list) return v.values;
  return v.values.empty() ? std::string{} : v.values.front();
}

std::string serialize_json(const std::vector<ThreatRecord>& records) {
  json out = json::array();
  for (const auto& r : records) {
    json obj = {{kId, r.threat_id},
                {kTitle, r.title},
                {kDescription, r.description},
                {kAgent, r.threat_agent},
                {kVulnerability, to_json_value(r.vulnerabilities)},
                {kAssets, to_json_value(r.threatened_assets)},
                {kComponents, to_json_value(r.affected_components)}};
    if (r.severity) obj[kSeverity] = to_string(*r.severity);
    if (r.likelihood) obj[kLikelihood] = to_string(*r.likelihood);
    out.push_back(std::move(obj));
  }
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting)

std::vector<std::vector<std::string>> csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !cell.empty()) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        row.clear();
        cell.clear();
        row_has_content = false;
        break;
      default:
        cell.push_back(c);
        row_has_content = true;
    }
  }
  if (quoted) throw ParseError("threats", "unterminated quoted CSV cell");
  if (row_has_content || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

TextOrList csv_list(const std::string& cell) {
  TextOrList out;
  if (cell.find(';') == std::string::npos) {
    if (auto t = trim(cell); !t.empty()) out.values.push_back(std::move(t));
    return out;
  }
  out.is_list = true;
  std::size_t start = 0;
  while (start <= cell.size()) {
    const auto end = std::min(cell.find(';', start), cell.size());
    if (auto t = trim(std::string_view(cell).substr(start, end - start)); !t.empty()) out.values.push_back(std::move(t));
    start = end + 1;
  }
  return out;
}

std::vector<ThreatRecord> parse_csv(std::string_view document) {
  if (document.starts_with("\xEF\xBB\xBF")) document.remove_prefix(3);
  const auto rows = csv_rows(document);
  std::vector<ThreatRecord> out;
  if (rows.empty()) return out;

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column[trim(rows[0][i])] = i;
  for (const char* required : {kId, kTitle, kDescription})
    if (!column.contains(required)) throw ParseError("threats", std::string("CSV header lacks '") + required + "'");

  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](const char* name) -> std::string {
      auto it = column.find(name);
      if (it == column.end() || it->second >= row.size()) return {};
      return row[it->second];
    };
    ThreatRecord rec;
    rec.threat_id = trim(cell(kId));
    rec.title = cell(kTitle);
    rec.description = cell(kDescription);
    rec.threat_agent = cell(kAgent);
    rec.vulnerabilities = csv_list(cell(kVulnerability));
    rec.threatened_assets = csv_list(cell(kAssets));
    rec.affected_components = csv_list(cell(kComponents));
    rec.severity = level_field(rec.threat_id, kSeverity, cell(kSeverity));
    rec.likelihood = level_field(rec.threat_id, kLikelihood, cell(kLikelihood));
    check_record(rec, seen, r - 1);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string csv_quote(std::string_view cell) {
  const bool needs = cell.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!cell.empty() && (std::isspace(static_cast<unsigned char>(cell.front())) ||
                                        std::isspace(static_cast<unsigned char>(cell.back()))));
  if (!needs) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_list_cell(const TextOrList& v) {
  if (!v.is_list) return v.values.empty() ? std::string{} : v.values.front();
  std::string out;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (i) out += ";";
    out += v.values[i];
  }
  if (v.values.size() <= 1) out += ";";  // keeps single-item lists recognisable as lists
  return out;
}

std::string serialize_csv(const std::vector<ThreatRecord>& records) {
  std::string out = std::string(kId) + "," + kTitle + "," + kDescription + "," + kAgent + "," + kVulnerability + "," +
                    kAssets + "," + kComponents + "," + kSeverity + "," + kLikelihood + "\n";
  for (const auto& r : records) {
    const std::string cells[] = {r.threat_id,
                                 r.title,
                                 r.description,
                                 r.threat_agent,
                                 csv_list_cell(r.vulnerabilities),
                                 csv_list_cell(r.threatened_assets),
                                 csv_list_cell(r.affected_components),
                                 r.severity ? std::string(to_string(*r.severity)) : std::string{},
                                 r.likelihood ? std::string(to_string(*r.likelihood)) : std::string{}};
    for (std::size_t i = 0; i < std::size(cells); ++i) {
      if (i) out += ",";
      out += csv_quote(cells[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::Low: return "Low";
    case Level::Medium: return "Medium";
    case Level::High: return "High";
  }
  return "Low";
}

std::optional<Level> parse_level(std::string_view text) noexcept {
  const std::string l = lower(text);
  if (l == "low") return Level::Low;
  if (l == "medium") return Level::Medium;
  if (l == "high") return Level::High;
  return std::nullopt;
}

std::optional<ThreatFormat> parse_threat_format(std::string_view text) noexcept {
  if (text == "json") return ThreatFormat::json;
  if (text == "csv") return ThreatFormat::csv;
  return std::nullopt;
}

std::vector<ThreatRecord> parse_threats(std::string_view document, ThreatFormat format) {
  return format == ThreatFormat::json ? parse_json(document) : parse_csv(document);
}

std::string serialize_threats(const std::vector<ThreatRecord>& records, ThreatFormat format) {
  return format == ThreatFormat::json ? serialize_json(records) : serialize_csv(records);
}

ThreatDocument synthesize_summary(const ThreatRecord& record) {
  ThreatDocument doc;
  doc.threat_id = record.threat_id;
  doc.summary = "A Threat with the title " + collapse_whitespace(record.title) + " and the description " +
                collapse_whitespace(record.description);
  return doc;
}

}  // namespace orca
