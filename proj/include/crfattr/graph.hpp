#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crfattr/matrix.hpp"

namespace crfattr {

struct VariableNode {
  int id = 0;
  std::string name;
  std::vector<int> factor_neighbors;  // ascending factor ids, no duplicates
};

enum class FactorKind { unary, pairwise };

struct FactorNode {
  int id = 0;
  FactorKind kind = FactorKind::unary;
  std::vector<int> scope;  // length 1 or 2; pairwise stored with ascending ids
};

/// Bipartite factor graph over binary variables. Every variable carries
/// exactly one unary factor; pairwise factors connect distinct variables and
/// are unique per unordered pair. Immutable after construction.
struct FactorGraph {
  std::vector<VariableNode> variables;
  std::vector<FactorNode> factors;

  int n_vars() const { return static_cast<int>(variables.size()); }
  int n_factors() const { return static_cast<int>(factors.size()); }
  int n_pairwise() const { return n_factors() - n_vars(); }
  int n_edges() const;

  /// Pairwise scopes in factor order.
  std::vector<std::pair<int, int>> pairs() const;
};

/// Canonical constructor: unary factor i for variable i, then the given
/// pairwise scopes sorted lexicographically with ids n_vars, n_vars+1, ...
/// Throws std::invalid_argument on out-of-range, self, or duplicate pairs.
FactorGraph make_graph(int n_vars, std::vector<std::pair<int, int>> pairs,
                       std::vector<std::string> names = {});

/// Checks every structural invariant; throws std::invalid_argument with a
/// description of the first violation found.
void validate_graph(const FactorGraph& g);

/// Symmetric N x N Pearson correlation table with unit diagonal.
struct CorrelationMatrix {
  int n = 0;
  std::vector<double> values;  // row-major n*n

  double at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
  double& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
};

/// Pearson correlation between binary label columns. Columns with zero
/// variance get a unit diagonal and zero off-diagonal entries so they do not
/// attract correlation-driven pairs.
CorrelationMatrix compute_correlation(const BinaryMatrix& labels);

/// Per-variable top-K |correlation| neighbors, unioned over variables and
/// deduplicated by unordered pair. Every variable ends up in at least K
/// pairwise factors. Ties break toward the smaller partner id.
FactorGraph build_graph_min(const CorrelationMatrix& corr, int k);

/// n_pairs distinct unordered pairs sampled uniformly without replacement
/// from a seeded deterministic stream.
FactorGraph build_graph_rand(int n_vars, int n_pairs, uint64_t seed);

/// The n_pairs pairs of largest |correlation|; ties break lexicographically.
FactorGraph build_graph_top(const CorrelationMatrix& corr, int n_pairs);

struct GraphStats {
  int n_vars = 0;
  int n_unary = 0;
  int n_pairwise = 0;
  int min_degree = 0;  // pairwise factors per variable
  int max_degree = 0;
  bool connected = false;
  int diameter = -1;  // variable-node hops; -1 when disconnected
};

GraphStats graph_stats(const FactorGraph& g);

/// JSON serialization: {"n_vars": int, "names": [...], "pairs": [[i,j],...]}
/// with ascending i<j and lexicographic pair order. Round-trips bit-exactly.
std::string graph_to_json(const FactorGraph& g);
FactorGraph graph_from_json(const std::string& text);

/// FNV-1a 64-bit over the canonical serialization, as a hex string. Used to
/// bind checkpoints to the graph they were trained against.
std::string graph_hash(const FactorGraph& g);

}  // namespace crfattr
