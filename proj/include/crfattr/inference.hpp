#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "crfattr/graph.hpp"
#include "crfattr/potentials.hpp"

namespace crfattr {

enum class Sharing { shared, independent };

struct InferenceConfig {
  int iterations = 2;       // propagation rounds T
  double epsilon = 1e-12;   // normalization floor; near-zero sums go uniform
  Sharing sharing = Sharing::shared;
};

/// One table per factor, indexed by factor id.
using TableSet = std::vector<PotentialTable>;

/// Directed message values for every (factor, variable-in-scope) edge.
/// Edges are enumerated factor-major in scope order. f2v entries are
/// nonnegative; v2f entries are normalized to sum 1 per edge.
struct MessageState {
  std::vector<std::array<double, 2>> f2v;
  std::vector<std::array<double, 2>> v2f;
};

/// All f2v set to [1,1]; v2f derived by one variable-to-factor update,
/// which yields the uniform message on every edge.
MessageState init_messages(const FactorGraph& g);

/// Flooding update of every factor-to-variable message from the previous
/// v2f values. Unary factors copy their table.
void step_factor_to_variable(const FactorGraph& g, const TableSet& tables,
                             MessageState& state);

/// Flooding update of every variable-to-factor message from the fresh f2v
/// values: product over the other incident factors, normalized to sum 1.
/// Sums below epsilon are replaced by the uniform message.
void step_variable_to_factor(const FactorGraph& g, MessageState& state,
                             double epsilon = 1e-12);

/// Per-variable product of all incident f2v messages, normalized; returns
/// p(x_i = 1) per variable.
std::vector<double> read_marginals(const FactorGraph& g, const MessageState& state,
                                   double epsilon = 1e-12);

/// Everything the backward pass needs: per-round messages, normalization
/// sums, floor flags, and a copy of the tables that produced them.
struct Tape {
  uint64_t graph_sig = 0;
  int iterations = 0;
  double epsilon = 0.0;
  bool shared = true;
  std::vector<TableSet> tables;                          // size 1 or T
  std::vector<std::array<double, 2>> v2f0;               // init messages
  std::vector<std::vector<std::array<double, 2>>> f2v;   // [t-1][edge]
  std::vector<std::vector<std::array<double, 2>>> v2f;   // [t-1][edge]
  std::vector<std::vector<double>> v2f_sum;              // raw sums
  std::vector<std::vector<uint8_t>> v2f_floored;
  std::vector<std::array<double, 2>> marginal_q;         // normalized per var
  std::vector<double> marginal_sum;
  std::vector<uint8_t> marginal_floored;
};

struct ForwardResult {
  std::vector<double> marginals;  // p(x_i = 1)
  Tape tape;
};

/// Unrolled flooding-schedule sum-product: init, T rounds of
/// (factor-to-variable with the round's tables; variable-to-factor), then
/// the marginal readout. tables_per_iteration has one set (shared) or T
/// sets (independent).
ForwardResult run_sum_product(const FactorGraph& g,
                              const std::vector<TableSet>& tables_per_iteration,
                              const InferenceConfig& config);

/// Exact reverse-mode gradients of a loss with upstream dL/dp(x_i=1) with
/// respect to every table entry. Returns gradients shaped like the forward
/// tables (summed over rounds in shared mode). Floored normalizations
/// propagate zero gradient.
std::vector<TableSet> backward_sum_product(const FactorGraph& g, const Tape& tape,
                                           std::span<const double> grad_marginals);

/// Structural signature used to detect stale tapes.
uint64_t graph_signature(const FactorGraph& g);

}  // namespace crfattr
