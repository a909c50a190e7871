#pragma once

#include <stdexcept>
#include <string>

namespace orca {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. `object_id` names the offending STIX object, threat or entry when known.
class ParseError : public Error {
 public:
  ParseError(std::string object_id, const std::string& message)
      : Error(object_id.empty() ? message : object_id + ": " + message),
        object_id_(std::move(object_id)) {}

  const std::string& object_id() const noexcept { return object_id_; }

 private:
  std::string object_id_;
};

class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string& corpus)
      : Error("empty corpus: " + corpus + " contains no usable entries") {}
};

class StaleCacheError : public Error {
 public:
  explicit StaleCacheError(const std::string& detail)
      : Error("stale cache (" + detail + "); delete the cache entry and re-ingest the corpus") {}
};

/// The external service could not be reached or answered garbage.
class TransportError : public Error {
 public:
  TransportError(std::string text_id, const std::string& message)
      : Error(text_id.empty() ? message : message + " [text " + text_id + "]"),
        text_id_(std::move(text_id)) {}

  const std::string& text_id() const noexcept { return text_id_; }

 private:
  std::string text_id_;
};

/// A caller-supplied argument violates a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An identifier does not resolve in the snapshot it was looked up in.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& id) : Error("unresolvable id: " + id), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace orca
