// Helpers shared by the unit tests and the acceptance gate. The oracles here are
// deliberately written without calling into the library code they check.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "orca/corpus.hpp"
#include "orca/mapping.hpp"
#include "orca/semsim.hpp"

#ifndef ORCA_FIXTURE_DIR
#error "ORCA_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace orca::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ORCA_FIXTURE_DIR) / name; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& label = "orca") {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / (label + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, std::string_view text);

/// Provider answering from a fixed table. Unknown texts throw, which keeps tests honest
/// about what actually gets embedded.
class TableProvider final : public EmbeddingProvider {
 public:
  explicit TableProvider(std::map<std::string, std::vector<double>> table, std::string tag = "table")
      : table_(std::move(table)), tag_(std::move(tag)) {}
  std::string tag() const override { return tag_; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts, std::span<const std::string> = {}) override {
    std::vector<Embedding> out;
    std::lock_guard lock(mutex_);
    for (const auto& t : texts) {
      auto it = table_.find(t);
      if (it == table_.end()) throw std::runtime_error("TableProvider: unknown text '" + t + "'");
      out.push_back({it->second, tag_});
      ++calls_;
    }
    return out;
  }
  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::string tag_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Unit vector in the plane of e0/e1 at the given cosine to e0; cosine(e0, at(c)) == c.
std::vector<double> at_cosine(double c, std::size_t dimension = 4);

// --- Independent oracles -------------------------------------------------------------

/// Cosine by the textbook formula in long double, no clamping.
long double reference_cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Reachability by repeated relaxation over an adjacency matrix: parent closure of the
/// seeds, then one can_precede hop from every closure member.
std::set<std::string> reference_deep_scan(const std::set<std::string>& seeds,
                                          const std::map<std::string, std::vector<std::string>>& parent_of,
                                          const std::map<std::string, std::vector<std::string>>& can_precede);

/// Counts (threat, tactic) increments straight from mapping lines and a technique table.
std::map<std::pair<std::string, std::string>, double> reference_heatmap_counts(
    const std::vector<MappingResult>& mappings, const std::map<std::string, std::vector<std::string>>& technique_tactics);

// --- Random fixtures -------------------------------------------------------------------

struct RandomGraph {
  CapecCorpus corpus;
  std::map<std::string, std::vector<std::string>> parent_of;
  std::map<std::string, std::vector<std::string>> can_precede;
};

/// `nodes` patterns named CAPEC-1..n. Acyclic graphs only add parent_of edges from lower
/// to higher numbers; cyclic ones add back edges too.
RandomGraph random_capec_graph(std::mt19937_64& rng, std::size_t nodes, bool cyclic);

/// A 14-tactic corpus mirroring ATT&CK enterprise ids plus techniques spread across them.
AttackCorpus fourteen_tactic_corpus(std::mt19937_64& rng, std::size_t techniques);

/// A loopback port that was free a moment ago and has nothing listening on it.
int closed_port();

}  // namespace orca::testing
