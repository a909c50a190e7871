#include <gtest/gtest.h>

#include "orca/error.hpp"
#include "orca/threatmodel.hpp"
#include "orca/util.hpp"
#include "support.hpp"

using namespace orca;
using orca::testing::fixture;

namespace {

const std::string kGen02Summary =
    "A Threat with the title Malicious access to exposed services using valid accounts and the description "
    "Access to valid accounts to use the O-Cloud services is often a requirement, which could be obtained through "
    "credential pharming or by obtaining the credentials from users after compromising the network. ... Access may "
    "be also gained through an exposed service that doesn't require authentication. In containerized environments, "
    "this may include an exposed Docker API, Kubernetes API server, kubelet, or web application such as the "
    "Kubernetes dashboard.";

}  // namespace

TEST(ParseThreats, TGen02Record) {
  const auto threats = parse_threats(read_file(fixture("tgen02.json")), ThreatFormat::json);
  ASSERT_EQ(threats.size(), 1u);
  const ThreatRecord& t = threats[0];
  EXPECT_EQ(t.threat_id, "T-GEN-02");
  EXPECT_EQ(t.threat_agent, "All");
  EXPECT_TRUE(t.vulnerabilities.is_list);
  EXPECT_EQ(t.vulnerabilities.values, std::vector<std::string>{"Lack of authentication"});
  EXPECT_FALSE(t.affected_components.is_list);
  EXPECT_FALSE(t.severity);
}

TEST(SynthesizeSummary, TGen02SummaryIsExact) {
  const auto threats = parse_threats(read_file(fixture("tgen02.json")), ThreatFormat::json);
  const ThreatDocument doc = synthesize_summary(threats.at(0));
  EXPECT_EQ(doc.threat_id, "T-GEN-02");
  EXPECT_EQ(doc.summary, kGen02Summary);
  EXPECT_FALSE(doc.embedding);
}

TEST(SynthesizeSummary, TemplateWithShortFields) {
  ThreatRecord r;
  r.threat_id = "X-1";
  r.title = "T";
  r.description = "D";
  EXPECT_EQ(synthesize_summary(r).summary, "A Threat with the title T and the description D");
}

TEST(SynthesizeSummary, CollapsesWhitespaceAndIsIdempotent) {
  ThreatRecord r;
  r.threat_id = "X-1";
  r.title = "  spaced\t title ";
  r.description = "line one\n\n  line two ";
  const std::string once = synthesize_summary(r).summary;
  EXPECT_EQ(once, "A Threat with the title spaced title and the description line one line two");
  EXPECT_EQ(synthesize_summary(r).summary, once);
}

TEST(ParseThreats, EmptyArrayYieldsNoDocuments) {
  EXPECT_TRUE(parse_threats("[]", ThreatFormat::json).empty());
  EXPECT_TRUE(parse_threats("", ThreatFormat::csv).empty());
}

TEST(ParseThreats, MissingTitleNamesThreat) {
  try {
    parse_threats(R"([{"Threat ID": "T-1", "Threat Description": "d"}])", ThreatFormat::json);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.object_id(), "T-1");
  }
  EXPECT_THROW(parse_threats(R"([{"Threat ID": "T-1", "Threat title": "t"}])", ThreatFormat::json), ParseError);
  EXPECT_THROW(parse_threats(R"([{"Threat title": "t", "Threat Description": "d"}])", ThreatFormat::json), ParseError);
}

TEST(ParseThreats, DuplicateCsvIdIsRejected) {
  const std::string csv =
      "Threat ID,Threat title,Threat Description\n"
      "T-1,first,desc\n"
      "T-1,second,desc\n";
  try {
    parse_threats(csv, ThreatFormat::csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.object_id(), "T-1");
  }
}

TEST(ParseThreats, CsvHeaderMustNameRequiredColumns) {
  EXPECT_THROW(parse_threats("Threat ID,Threat title\nT-1,x\n", ThreatFormat::csv), ParseError);
}

TEST(ParseThreats, InvalidJsonAndUnknownLevel) {
  EXPECT_THROW(parse_threats("[{", ThreatFormat::json), ParseError);
  EXPECT_THROW(parse_threats(R"([{"Threat ID": "T-1", "Threat title": "t", "Threat Description": "d", "Severity": "Extreme"}])",
                             ThreatFormat::json),
               ParseError);
}

TEST(ParseThreats, CsvAndJsonFixturesAgree) {
  const auto from_json = parse_threats(read_file(fixture("threats.json")), ThreatFormat::json);
  const auto from_csv = parse_threats(read_file(fixture("threats.csv")), ThreatFormat::csv);
  ASSERT_EQ(from_json.size(), 5u);
  ASSERT_EQ(from_csv.size(), from_json.size());
  for (std::size_t i = 0; i < from_json.size(); ++i) {
    EXPECT_EQ(from_csv[i].threat_id, from_json[i].threat_id);
    EXPECT_EQ(synthesize_summary(from_csv[i]).summary, synthesize_summary(from_json[i]).summary);
    EXPECT_EQ(from_csv[i].severity, from_json[i].severity);
    EXPECT_EQ(from_csv[i].likelihood, from_json[i].likelihood);
  }
  EXPECT_EQ(from_json[1].severity, Level::High);
  EXPECT_EQ(from_json[1].likelihood, Level::Medium);
}

TEST(SerializeThreats, RoundTripsBothFormats) {
  const auto records = parse_threats(read_file(fixture("threats.json")), ThreatFormat::json);
  for (ThreatFormat f : {ThreatFormat::json, ThreatFormat::csv}) {
    const auto back = parse_threats(serialize_threats(records, f), f);
    EXPECT_EQ(back, records) << (f == ThreatFormat::json ? "json" : "csv");
  }
}

TEST(SerializeThreats, CsvQuotesEmbeddedCommasQuotesAndNewlines) {
  ThreatRecord r;
  r.threat_id = "T-Q";
  r.title = "a \"quoted\", title";
  r.description = "multi\nline";
  r.vulnerabilities = {{"one", "two"}, true};
  const auto back = parse_threats(serialize_threats({r}, ThreatFormat::csv), ThreatFormat::csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
}

TEST(ParseLevel, AcceptsTheThreeLevels) {
  EXPECT_EQ(parse_level("Low"), Level::Low);
  EXPECT_EQ(parse_level("medium"), Level::Medium);
  EXPECT_EQ(parse_level("HIGH"), Level::High);
  EXPECT_FALSE(parse_level("Critical"));
}
