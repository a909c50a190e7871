// HTTP clients for the embedding/classifier service. The only translation unit that
// includes cpp-httplib.
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "orca/error.hpp"
#include "orca/semsim.hpp"
#include "orca/tactics.hpp"

namespace orca {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& endpoint, int timeout_seconds) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  return client;
}

json post_json(const std::string& endpoint, int timeout_seconds, const std::string& path, const json& body,
               const std::string& text_id) {
  auto client = make_client(endpoint, timeout_seconds);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw TransportError(text_id, "POST " + endpoint + path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError(text_id, "POST " + endpoint + path + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw TransportError(text_id, "POST " + endpoint + path + " returned invalid JSON: " + e.what());
  }
}

}  // namespace

ServiceProvider::ServiceProvider(ServiceOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ValidationError("service provider requires an endpoint");
  if (options_.batch_cap == 0) throw ValidationError("batch cap must be positive");
}

std::string ServiceProvider::tag() const {
  std::lock_guard lock(mutex_);
  if (!model_.empty()) return "service:" + model_ + "/" + std::to_string(dimension_);
  return "service:" + options_.endpoint;
}

std::vector<std::string> ServiceProvider::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

void ServiceProvider::negotiate() {
  // Caller holds mutex_.
  if (negotiated_) return;
  batch_cap_ = options_.batch_cap;
  auto client = make_client(options_.endpoint, options_.timeout_seconds);
  if (auto res = client.Get("/info"); res && res->status == 200) {
    try {
      const json info = json::parse(res->body);
      model_ = info.value("model", std::string{});
      dimension_ = info.value("dimension", std::size_t{0});
      if (auto cap = info.value("max_batch", std::size_t{0}); cap > 0) batch_cap_ = std::min(batch_cap_, cap);
    } catch (const json::exception&) {
      warnings_.push_back("service /info returned unparseable JSON; using client defaults");
    }
  }
  negotiated_ = true;
}

std::vector<Embedding> ServiceProvider::embed_batch(std::span<const std::string> texts, std::span<const std::string> ids) {
  std::size_t cap = 0;
  {
    std::lock_guard lock(mutex_);
    negotiate();
    cap = batch_cap_;
  }
  auto id_at = [&](std::size_t i) { return i < ids.size() ? ids[i] : std::string{}; };

  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += cap) {
    const std::size_t n = std::min(cap, texts.size() - start);
    json request = {{"texts", json::array()}};
    for (std::size_t i = start; i < start + n; ++i) request["texts"].push_back(texts[i]);
    const json response = post_json(options_.endpoint, options_.timeout_seconds, "/embed", request, id_at(start));

    const json vectors = response.value("embeddings", json::array());
    if (!vectors.is_array() || vectors.size() != n)
      throw TransportError(id_at(start), "service returned " + std::to_string(vectors.size()) + " embeddings for " +
                                             std::to_string(n) + " texts");
    const std::string model = response.value("model", std::string{});
    const std::size_t dimension = response.value("dimension", std::size_t{0});

    std::lock_guard lock(mutex_);
    if (model_.empty()) model_ = model;
    if (dimension_ == 0) dimension_ = dimension;
    if (dimension != 0 && dimension != dimension_)
      throw TransportError(id_at(start), "service dimension changed from " + std::to_string(dimension_) + " to " +
                                             std::to_string(dimension));
    const std::string tag = "service:" + model_ + "/" + std::to_string(dimension_);
    const auto truncated = response.value("truncated", json::array());
    for (std::size_t i = 0; i < n; ++i) {
      Embedding e;
      e.provider_tag = tag;
      try {
        e.vector = vectors[i].get<std::vector<double>>();
      } catch (const json::exception&) {
        throw TransportError(id_at(start + i), "service embedding is not a numeric array");
      }
      if (dimension_ == 0) dimension_ = e.vector.size();
      if (e.vector.size() != dimension_)
        throw TransportError(id_at(start + i), "embedding length " + std::to_string(e.vector.size()) +
                                                   " differs from advertised dimension " + std::to_string(dimension_));
      if (truncated.is_array() && i < truncated.size() && truncated[i].is_boolean() && truncated[i].get<bool>())
        warnings_.push_back("service truncated input" + (id_at(start + i).empty() ? std::string{} : " " + id_at(start + i)));
      out.push_back(std::move(e));
    }
  }
  return out;
}

ServiceClassifier::ServiceClassifier(std::string endpoint, int timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
  if (endpoint_.empty()) throw ValidationError("service classifier requires an endpoint");
}

TacticSet ServiceClassifier::classify(const ThreatDocument& document) {
  const json response = post_json(endpoint_, timeout_seconds_, "/tactics", {{"summary", document.summary}}, document.threat_id);
  auto it = response.find("tactics");
  if (it == response.end() || !it->is_array())
    throw TransportError(document.threat_id, "classifier response lacks a 'tactics' list");
  TacticSet out;
  for (const auto& t : *it)
    if (t.is_string()) out.insert(t.get<std::string>());
  return out;
}

}  // namespace orca
