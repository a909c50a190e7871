#include "support.hpp"

#include <cmath>
#include <fstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace orca::testing {

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<double> at_cosine(double c, std::size_t dimension) {
  std::vector<double> v(dimension, 0.0);
  v[0] = c;
  v[1] = std::sqrt(std::max(0.0, 1.0 - c * c));
  return v;
}

long double reference_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::set<std::string> reference_deep_scan(const std::set<std::string>& seeds,
                                          const std::map<std::string, std::vector<std::string>>& parent_of,
                                          const std::map<std::string, std::vector<std::string>>& can_precede) {
  // Index nodes, then Warshall-style closure on a boolean matrix.
  std::set<std::string> all(seeds);
  for (const auto& [k, vs] : parent_of) {
    all.insert(k);
    all.insert(vs.begin(), vs.end());
  }
  for (const auto& [k, vs] : can_precede) {
    all.insert(k);
    all.insert(vs.begin(), vs.end());
  }
  std::vector<std::string> names(all.begin(), all.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  const std::size_t n = names.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [k, vs] : parent_of)
    for (const auto& v : vs) reach[index[k]][index[v]] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;

  std::set<std::string> closure;
  for (const auto& s : seeds)
    for (std::size_t j = 0; j < n; ++j)
      if (reach[index[s]][j]) closure.insert(names[j]);
  std::set<std::string> out(closure);
  for (const auto& c : closure)
    if (auto it = can_precede.find(c); it != can_precede.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

std::map<std::pair<std::string, std::string>, double> reference_heatmap_counts(
    const std::vector<MappingResult>& mappings, const std::map<std::string, std::vector<std::string>>& technique_tactics) {
  std::map<std::pair<std::string, std::string>, double> cells;
  for (const auto& m : mappings) {
    if (m.branch != Branch::TTM) continue;
    auto it = technique_tactics.find(m.target_id);
    if (it == technique_tactics.end()) continue;
    for (const auto& tactic : it->second) cells[{m.threat_id, tactic}] += 1;
  }
  return cells;
}

RandomGraph random_capec_graph(std::mt19937_64& rng, std::size_t nodes, bool cyclic) {
  RandomGraph g;
  auto name = [](std::size_t i) { return "CAPEC-" + std::to_string(i + 1); };
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double p_parent = 2.0 / static_cast<double>(nodes);
  const double p_precede = 1.5 / static_cast<double>(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    AttackPattern p;
    p.capec_id = name(i);
    p.name = "pattern " + std::to_string(i + 1);
    p.description = "synthetic";
    for (std::size_t j = 0; j < nodes; ++j) {
      if (j == i) continue;
      if ((cyclic || j > i) && u(rng) < p_parent) p.parent_of.push_back(name(j));
      if (u(rng) < p_precede) p.can_precede.push_back(name(j));
    }
    if (cyclic && i + 1 < nodes && u(rng) < 0.3) p.parent_of.push_back(name(i + 1));
    g.parent_of[p.capec_id] = p.parent_of;
    g.can_precede[p.capec_id] = p.can_precede;
    g.corpus.patterns.emplace(p.capec_id, std::move(p));
  }
  if (cyclic && nodes > 1) {
    // Guarantee at least one cycle: close a ring through the first three nodes.
    auto& last = g.corpus.patterns.at(name(std::min<std::size_t>(2, nodes - 1))).parent_of;
    last.push_back(name(0));
    g.parent_of[name(std::min<std::size_t>(2, nodes - 1))] = last;
    auto& first = g.corpus.patterns.at(name(0)).parent_of;
    first.push_back(name(std::min<std::size_t>(2, nodes - 1)));
    g.parent_of[name(0)] = first;
  }
  return g;
}

AttackCorpus fourteen_tactic_corpus(std::mt19937_64& rng, std::size_t techniques) {
  static const char* ids[] = {"TA0001", "TA0002", "TA0003", "TA0004", "TA0005", "TA0006", "TA0007",
                              "TA0008", "TA0009", "TA0010", "TA0011", "TA0040", "TA0042", "TA0043"};
  AttackCorpus corpus;
  for (const char* id : ids) corpus.tactics.emplace(id, TacticEntry{id, std::string("tactic ") + id, "", id});
  std::uniform_int_distribution<std::size_t> pick(0, 13);
  std::uniform_int_distribution<int> fanout(1, 4);
  for (std::size_t i = 0; i < techniques; ++i) {
    TechniqueEntry t;
    t.technique_id = "T" + std::to_string(1000 + i);
    t.name = "technique " + std::to_string(i);
    t.description = "synthetic technique";
    std::set<std::string> tactics;
    for (int k = fanout(rng); k > 0; --k) tactics.insert(ids[pick(rng)]);
    t.tactic_ids.assign(tactics.begin(), tactics.end());
    corpus.techniques.emplace(t.technique_id, std::move(t));
  }
  return corpus;
}

int closed_port() {
  // Bind without listen so connect() is refused instead of queued.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof addr;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    ::close(fd);
    throw std::runtime_error("bind() failed");
  }
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace orca::testing
