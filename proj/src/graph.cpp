#include "crfattr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "crfattr/rng.hpp"

namespace crfattr {

int FactorGraph::n_edges() const {
  int e = 0;
  for (const auto& f : factors) e += static_cast<int>(f.scope.size());
  return e;
}

std::vector<std::pair<int, int>> FactorGraph::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& f : factors) {
    if (f.kind == FactorKind::pairwise) out.emplace_back(f.scope[0], f.scope[1]);
  }
  return out;
}

FactorGraph make_graph(int n_vars, std::vector<std::pair<int, int>> pairs,
                       std::vector<std::string> names) {
  if (n_vars <= 0) throw std::invalid_argument("make_graph: n_vars must be positive");
  if (!names.empty() && static_cast<int>(names.size()) != n_vars)
    throw std::invalid_argument("make_graph: names/n_vars mismatch");

  for (auto& p : pairs) {
    if (p.first > p.second) std::swap(p.first, p.second);
    if (p.first == p.second) throw std::invalid_argument("make_graph: self pair");
    if (p.first < 0 || p.second >= n_vars)
      throw std::invalid_argument("make_graph: pair out of range");
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
    throw std::invalid_argument("make_graph: duplicate pair");

  FactorGraph g;
  g.variables.resize(n_vars);
  for (int i = 0; i < n_vars; ++i) {
    g.variables[i].id = i;
    g.variables[i].name = names.empty() ? "x" + std::to_string(i) : names[i];
    g.variables[i].factor_neighbors.push_back(i);  // own unary factor
  }
  g.factors.reserve(n_vars + pairs.size());
  for (int i = 0; i < n_vars; ++i) {
    FactorNode f;
    f.id = i;
    f.kind = FactorKind::unary;
    f.scope = {i};
    g.factors.push_back(std::move(f));
  }
  int next_id = n_vars;
  for (const auto& [a, b] : pairs) {
    FactorNode f;
    f.id = next_id;
    f.kind = FactorKind::pairwise;
    f.scope = {a, b};
    g.variables[a].factor_neighbors.push_back(next_id);
    g.variables[b].factor_neighbors.push_back(next_id);
    g.factors.push_back(std::move(f));
    ++next_id;
  }
  return g;
}

void validate_graph(const FactorGraph& g) {
  const int n = g.n_vars();
  if (n == 0) throw std::invalid_argument("graph: no variables");
  for (int i = 0; i < n; ++i) {
    if (g.variables[i].id != i) throw std::invalid_argument("graph: variable ids not dense");
  }
  std::vector<int> unary_count(n, 0);
  std::set<std::pair<int, int>> seen_pairs;
  std::vector<std::vector<int>> var_to_factor(n);
  for (int f = 0; f < g.n_factors(); ++f) {
    const FactorNode& fn = g.factors[f];
    if (fn.id != f) throw std::invalid_argument("graph: factor ids not dense");
    if (fn.kind == FactorKind::unary) {
      if (fn.scope.size() != 1) throw std::invalid_argument("graph: unary scope size != 1");
      ++unary_count[fn.scope[0]];
    } else {
      if (fn.scope.size() != 2) throw std::invalid_argument("graph: pairwise scope size != 2");
      if (fn.scope[0] >= fn.scope[1])
        throw std::invalid_argument("graph: pairwise scope not ascending");
      if (!seen_pairs.insert({fn.scope[0], fn.scope[1]}).second)
        throw std::invalid_argument("graph: duplicate pairwise scope");
    }
    for (int v : fn.scope) {
      if (v < 0 || v >= n) throw std::invalid_argument("graph: scope out of range");
      var_to_factor[v].push_back(f);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (unary_count[i] != 1)
      throw std::invalid_argument("graph: variable lacks exactly one unary factor");
    std::vector<int> neigh = g.variables[i].factor_neighbors;
    std::vector<int> sorted_neigh = neigh;
    std::sort(sorted_neigh.begin(), sorted_neigh.end());
    if (std::adjacent_find(sorted_neigh.begin(), sorted_neigh.end()) != sorted_neigh.end())
      throw std::invalid_argument("graph: duplicate factor neighbor");
    if (sorted_neigh != var_to_factor[i])
      throw std::invalid_argument("graph: adjacency mismatch between sides");
  }
}

CorrelationMatrix compute_correlation(const BinaryMatrix& labels) {
  const size_t m = labels.rows;
  const int n = static_cast<int>(labels.cols);
  if (m < 2 || n == 0) throw std::invalid_argument("compute_correlation: need M >= 2 and nonempty columns");
  for (uint8_t x : labels.v) {
    if (x > 1) throw std::invalid_argument("compute_correlation: non-binary entry");
  }

  // Integer co-occurrence counts keep the result exactly reproducible.
  std::vector<int64_t> ones(n, 0);
  std::vector<int64_t> joint(static_cast<size_t>(n) * n, 0);
  for (size_t r = 0; r < m; ++r) {
    const uint8_t* row = labels.row(r);
    for (int j = 0; j < n; ++j) {
      if (!row[j]) continue;
      ++ones[j];
      for (int k = j; k < n; ++k) {
        if (row[k]) ++joint[static_cast<size_t>(j) * n + k];
      }
    }
  }

  const auto mi = static_cast<int64_t>(m);
  std::vector<int64_t> var(n);
  for (int j = 0; j < n; ++j) var[j] = mi * ones[j] - ones[j] * ones[j];

  CorrelationMatrix corr;
  corr.n = n;
  corr.values.assign(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    corr.at(j, j) = 1.0;
    for (int k = j + 1; k < n; ++k) {
      if (var[j] == 0 || var[k] == 0) continue;  // constant column: leave 0
      const int64_t cov = mi * joint[static_cast<size_t>(j) * n + k] - ones[j] * ones[k];
      const double r = static_cast<double>(cov) /
                       std::sqrt(static_cast<double>(var[j]) * static_cast<double>(var[k]));
      corr.at(j, k) = r;
      corr.at(k, j) = r;
    }
  }
  return corr;
}

FactorGraph build_graph_min(const CorrelationMatrix& corr, int k) {
  const int n = corr.n;
  if (k < 1 || k > n - 1) throw std::invalid_argument("build_graph_min: K out of range");
  std::set<std::pair<int, int>> selected;
  std::vector<int> order(n - 1);
  for (int i = 0; i < n; ++i) {
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      if (j != i) order[idx++] = j;
    }
    // largest |corr| first, smaller partner id wins ties
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double ca = std::abs(corr.at(i, a));
      const double cb = std::abs(corr.at(i, b));
      if (ca != cb) return ca > cb;
      return a < b;
    });
    for (int t = 0; t < k; ++t) {
      const int j = order[t];
      selected.insert({std::min(i, j), std::max(i, j)});
    }
  }
  return make_graph(n, {selected.begin(), selected.end()});
}

FactorGraph build_graph_rand(int n_vars, int n_pairs, uint64_t seed) {
  const int64_t all = static_cast<int64_t>(n_vars) * (n_vars - 1) / 2;
  if (n_pairs < 0 || n_pairs > all)
    throw std::invalid_argument("build_graph_rand: N_pairs exceeds number of distinct pairs");
  std::vector<std::pair<int, int>> pool;
  pool.reserve(all);
  for (int i = 0; i < n_vars; ++i) {
    for (int j = i + 1; j < n_vars; ++j) pool.emplace_back(i, j);
  }
  Rng rng(seed);
  rng.shuffle(pool);
  pool.resize(n_pairs);
  return make_graph(n_vars, std::move(pool));
}

FactorGraph build_graph_top(const CorrelationMatrix& corr, int n_pairs) {
  const int n = corr.n;
  const int64_t all = static_cast<int64_t>(n) * (n - 1) / 2;
  if (n_pairs < 0 || n_pairs > all)
    throw std::invalid_argument("build_graph_top: N_pairs out of range");
  std::vector<std::pair<int, int>> pool;
  pool.reserve(all);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pool.emplace_back(i, j);
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
                     const double ca = std::abs(corr.at(a.first, a.second));
                     const double cb = std::abs(corr.at(b.first, b.second));
                     if (ca != cb) return ca > cb;
                     return a < b;
                   });
  pool.resize(n_pairs);
  return make_graph(n, std::move(pool));
}

GraphStats graph_stats(const FactorGraph& g) {
  GraphStats s;
  s.n_vars = g.n_vars();
  s.n_unary = s.n_vars;
  s.n_pairwise = g.n_pairwise();

  std::vector<std::vector<int>> adj(s.n_vars);
  std::vector<int> degree(s.n_vars, 0);
  for (const auto& f : g.factors) {
    if (f.kind != FactorKind::pairwise) continue;
    adj[f.scope[0]].push_back(f.scope[1]);
    adj[f.scope[1]].push_back(f.scope[0]);
    ++degree[f.scope[0]];
    ++degree[f.scope[1]];
  }
  s.min_degree = *std::min_element(degree.begin(), degree.end());
  s.max_degree = *std::max_element(degree.begin(), degree.end());

  // Eccentricities by BFS on the variable adjacency.
  int diameter = 0;
  bool connected = true;
  std::vector<int> dist(s.n_vars);
  for (int src = 0; src < s.n_vars && connected; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[src] = 0;
    std::deque<int> q{src};
    int reached = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int w : adj[u]) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          diameter = std::max(diameter, dist[w]);
          ++reached;
          q.push_back(w);
        }
      }
    }
    if (reached != s.n_vars) connected = false;
  }
  s.connected = connected;
  s.diameter = connected ? diameter : -1;
  return s;
}

std::string graph_to_json(const FactorGraph& g) {
  nlohmann::json j;
  j["n_vars"] = g.n_vars();
  auto names = nlohmann::json::array();
  for (const auto& v : g.variables) names.push_back(v.name);
  j["names"] = std::move(names);
  auto pairs = nlohmann::json::array();
  for (const auto& [a, b] : g.pairs()) pairs.push_back(nlohmann::json::array({a, b}));
  j["pairs"] = std::move(pairs);
  return j.dump();
}

FactorGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("graph_from_json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n_vars") || !j.contains("names") || !j.contains("pairs"))
    throw std::invalid_argument("graph_from_json: missing fields");
  const int n = j.at("n_vars").get<int>();
  std::vector<std::string> names = j.at("names").get<std::vector<std::string>>();
  std::vector<std::pair<int, int>> pairs;
  for (const auto& p : j.at("pairs")) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("graph_from_json: bad pair");
    pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return make_graph(n, std::move(pairs), std::move(names));
}

std::string graph_hash(const FactorGraph& g) {
  const std::string bytes = graph_to_json(g);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crfattr
