#include "crfattr/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace crfattr {

namespace {

// Flat edge/adjacency view of a factor graph. Edge ids are factor-major in
// scope order, so edge(f, k) = factor_edge_off[f] + k.
struct GraphIndex {
  int n_vars = 0;
  int n_factors = 0;
  int n_edges = 0;
  std::vector<int> factor_edge_off;  // n_factors + 1
  std::vector<int> edge_var;
  std::vector<int> var_edge_off;     // n_vars + 1
  std::vector<int> var_edges;        // incident edge ids, factor-id order

  explicit GraphIndex(const FactorGraph& g) {
    n_vars = g.n_vars();
    n_factors = g.n_factors();
    factor_edge_off.resize(n_factors + 1);
    std::vector<int> var_degree(n_vars, 0);
    int e = 0;
    for (int f = 0; f < n_factors; ++f) {
      factor_edge_off[f] = e;
      for (int v : g.factors[f].scope) {
        edge_var.push_back(v);
        ++var_degree[v];
        ++e;
      }
    }
    factor_edge_off[n_factors] = e;
    n_edges = e;
    var_edge_off.resize(n_vars + 1);
    int acc = 0;
    for (int v = 0; v < n_vars; ++v) {
      var_edge_off[v] = acc;
      acc += var_degree[v];
    }
    var_edge_off[n_vars] = acc;
    var_edges.resize(acc);
    std::vector<int> cursor(var_edge_off.begin(), var_edge_off.end() - 1);
    for (int ed = 0; ed < n_edges; ++ed) var_edges[cursor[edge_var[ed]]++] = ed;
  }

  int degree(int v) const { return var_edge_off[v + 1] - var_edge_off[v]; }
  std::span<const int> incident(int v) const {
    return {var_edges.data() + var_edge_off[v], static_cast<size_t>(degree(v))};
  }
};

void check_tables(const FactorGraph& g, const TableSet& tables) {
  if (static_cast<int>(tables.size()) != g.n_factors())
    throw std::invalid_argument("inference: missing table for a factor");
  for (int f = 0; f < g.n_factors(); ++f) {
    const int want = g.factors[f].kind == FactorKind::unary ? 2 : 4;
    if (tables[f].n_states != want)
      throw std::invalid_argument("inference: table state count mismatch");
  }
}

void f2v_step(const FactorGraph& g, const GraphIndex& ix, const TableSet& tables,
              MessageState& state) {
  for (int f = 0; f < ix.n_factors; ++f) {
    const FactorNode& fn = g.factors[f];
    const int e0 = ix.factor_edge_off[f];
    const PotentialTable& t = tables[f];
    if (fn.kind == FactorKind::unary) {
      state.f2v[e0] = {t[0], t[1]};
    } else {
      const auto& in_a = state.v2f[e0];
      const auto& in_b = state.v2f[e0 + 1];
      state.f2v[e0] = {t[0] * in_b[0] + t[1] * in_b[1],
                       t[2] * in_b[0] + t[3] * in_b[1]};
      state.f2v[e0 + 1] = {t[0] * in_a[0] + t[2] * in_a[1],
                           t[1] * in_a[0] + t[3] * in_a[1]};
    }
  }
}

struct NormScratch {
  std::vector<std::array<double, 2>> prefix;
  std::vector<std::array<double, 2>> suffix;
};

// Leave-one-out products with per-edge normalization. Records raw sums and
// floor flags when sums/floored are non-null.
void v2f_step(const GraphIndex& ix, MessageState& state, double epsilon,
              NormScratch& scratch, double* sums, uint8_t* floored) {
  for (int v = 0; v < ix.n_vars; ++v) {
    const auto edges = ix.incident(v);
    const int d = static_cast<int>(edges.size());
    scratch.prefix.resize(d + 1);
    scratch.suffix.resize(d + 1);
    scratch.prefix[0] = {1.0, 1.0};
    for (int i = 0; i < d; ++i) {
      const auto& m = state.f2v[edges[i]];
      scratch.prefix[i + 1] = {scratch.prefix[i][0] * m[0], scratch.prefix[i][1] * m[1]};
    }
    scratch.suffix[d] = {1.0, 1.0};
    for (int i = d - 1; i >= 0; --i) {
      const auto& m = state.f2v[edges[i]];
      scratch.suffix[i] = {scratch.suffix[i + 1][0] * m[0], scratch.suffix[i + 1][1] * m[1]};
    }
    for (int i = 0; i < d; ++i) {
      const int e = edges[i];
      const double r0 = scratch.prefix[i][0] * scratch.suffix[i + 1][0];
      const double r1 = scratch.prefix[i][1] * scratch.suffix[i + 1][1];
      const double s = r0 + r1;
      if (sums) sums[e] = s;
      if (s < epsilon) {
        state.v2f[e] = {0.5, 0.5};
        if (floored) floored[e] = 1;
      } else {
        state.v2f[e] = {r0 / s, r1 / s};
        if (floored) floored[e] = 0;
      }
    }
  }
}

void read_marginals_into(const GraphIndex& ix, const MessageState& state, double epsilon,
                         std::vector<double>& p, std::array<double, 2>* q_out,
                         double* sums, uint8_t* floored) {
  p.resize(ix.n_vars);
  for (int v = 0; v < ix.n_vars; ++v) {
    double r0 = 1.0, r1 = 1.0;
    for (int e : ix.incident(v)) {
      r0 *= state.f2v[e][0];
      r1 *= state.f2v[e][1];
    }
    const double s = r0 + r1;
    std::array<double, 2> q;
    bool fl = s < epsilon;
    q = fl ? std::array<double, 2>{0.5, 0.5} : std::array<double, 2>{r0 / s, r1 / s};
    if (sums) sums[v] = s;
    if (floored) floored[v] = fl ? 1 : 0;
    if (q_out) q_out[v] = q;
    p[v] = q[1];
  }
}

void check_config(const InferenceConfig& c) {
  if (c.iterations < 1) throw std::invalid_argument("inference: iterations must be >= 1");
  if (!(c.epsilon > 0.0) || c.epsilon > 1e-3)
    throw std::invalid_argument("inference: epsilon must be in (0, 1e-3]");
}

}  // namespace

uint64_t graph_signature(const FactorGraph& g) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<uint64_t>(g.n_vars()));
  for (const auto& f : g.factors) {
    mix(f.kind == FactorKind::unary ? 1 : 2);
    for (int v : f.scope) mix(static_cast<uint64_t>(v));
  }
  return h;
}

MessageState init_messages(const FactorGraph& g) {
  const GraphIndex ix(g);
  MessageState s;
  s.f2v.assign(ix.n_edges, {1.0, 1.0});
  s.v2f.assign(ix.n_edges, {0.0, 0.0});
  NormScratch scratch;
  v2f_step(ix, s, 1e-12, scratch, nullptr, nullptr);
  return s;
}

void step_factor_to_variable(const FactorGraph& g, const TableSet& tables,
                             MessageState& state) {
  check_tables(g, tables);
  const GraphIndex ix(g);
  if (static_cast<int>(state.f2v.size()) != ix.n_edges)
    throw std::invalid_argument("inference: state does not match graph");
  f2v_step(g, ix, tables, state);
}

void step_variable_to_factor(const FactorGraph& g, MessageState& state, double epsilon) {
  const GraphIndex ix(g);
  if (static_cast<int>(state.f2v.size()) != ix.n_edges)
    throw std::invalid_argument("inference: state does not match graph");
  NormScratch scratch;
  v2f_step(ix, state, epsilon, scratch, nullptr, nullptr);
}

std::vector<double> read_marginals(const FactorGraph& g, const MessageState& state,
                                   double epsilon) {
  const GraphIndex ix(g);
  if (static_cast<int>(state.f2v.size()) != ix.n_edges)
    throw std::invalid_argument("inference: state does not match graph");
  std::vector<double> p;
  read_marginals_into(ix, state, epsilon, p, nullptr, nullptr, nullptr);
  return p;
}

ForwardResult run_sum_product(const FactorGraph& g,
                              const std::vector<TableSet>& tables_per_iteration,
                              const InferenceConfig& config) {
  check_config(config);
  const int T = config.iterations;
  const bool shared = config.sharing == Sharing::shared;
  const auto expected_sets = static_cast<size_t>(shared ? 1 : T);
  if (tables_per_iteration.size() != expected_sets)
    throw std::invalid_argument("run_sum_product: table-set count does not match sharing mode");
  for (const auto& ts : tables_per_iteration) check_tables(g, ts);

  const GraphIndex ix(g);
  ForwardResult out;
  Tape& tape = out.tape;
  tape.graph_sig = graph_signature(g);
  tape.iterations = T;
  tape.epsilon = config.epsilon;
  tape.shared = shared;
  tape.tables = tables_per_iteration;
  tape.f2v.resize(T);
  tape.v2f.resize(T);
  tape.v2f_sum.assign(T, std::vector<double>(ix.n_edges, 0.0));
  tape.v2f_floored.assign(T, std::vector<uint8_t>(ix.n_edges, 0));

  MessageState state = init_messages(g);
  tape.v2f0 = state.v2f;

  NormScratch scratch;
  for (int t = 1; t <= T; ++t) {
    const TableSet& tables = tables_per_iteration[shared ? 0 : t - 1];
    f2v_step(g, ix, tables, state);
    tape.f2v[t - 1] = state.f2v;
    v2f_step(ix, state, config.epsilon, scratch, tape.v2f_sum[t - 1].data(),
             tape.v2f_floored[t - 1].data());
    tape.v2f[t - 1] = state.v2f;
  }

  tape.marginal_q.resize(ix.n_vars);
  tape.marginal_sum.resize(ix.n_vars);
  tape.marginal_floored.resize(ix.n_vars);
  read_marginals_into(ix, state, config.epsilon, out.marginals, tape.marginal_q.data(),
                      tape.marginal_sum.data(), tape.marginal_floored.data());
  return out;
}

std::vector<TableSet> backward_sum_product(const FactorGraph& g, const Tape& tape,
                                           std::span<const double> grad_marginals) {
  if (tape.graph_sig != graph_signature(g))
    throw std::invalid_argument("backward_sum_product: tape does not match graph");
  if (static_cast<int>(grad_marginals.size()) != g.n_vars())
    throw std::invalid_argument("backward_sum_product: marginal gradient size mismatch");
  const GraphIndex ix(g);
  const int T = tape.iterations;

  std::vector<TableSet> grads(tape.tables.size());
  for (size_t s = 0; s < grads.size(); ++s) {
    grads[s].resize(tape.tables[s].size());
    for (size_t f = 0; f < grads[s].size(); ++f) {
      grads[s][f].n_states = tape.tables[s][f].n_states;
      grads[s][f].v = {0.0, 0.0, 0.0, 0.0};
    }
  }

  std::vector<std::array<double, 2>> grad_f2v(ix.n_edges);
  std::vector<std::array<double, 2>> grad_v2f(ix.n_edges, {0.0, 0.0});
  std::vector<std::array<double, 2>> sub;  // f2v values excluding the target edge
  std::vector<std::array<double, 2>> pre, suf;

  for (int t = T; t >= 1; --t) {
    const auto& f2v_t = tape.f2v[t - 1];
    std::fill(grad_f2v.begin(), grad_f2v.end(), std::array<double, 2>{0.0, 0.0});

    if (t == T) {
      // Marginal readout consumes the final f2v messages.
      for (int v = 0; v < ix.n_vars; ++v) {
        if (tape.marginal_floored[v]) continue;
        const double gq1 = grad_marginals[v];
        if (gq1 == 0.0) continue;
        const auto& q = tape.marginal_q[v];
        const double s = tape.marginal_sum[v];
        const double inner = gq1 * q[1];
        const std::array<double, 2> graw = {(0.0 - inner) / s, (gq1 - inner) / s};
        const auto edges = ix.incident(v);
        const int d = static_cast<int>(edges.size());
        pre.resize(d + 1);
        suf.resize(d + 1);
        pre[0] = {1.0, 1.0};
        for (int i = 0; i < d; ++i) {
          const auto& m = f2v_t[edges[i]];
          pre[i + 1] = {pre[i][0] * m[0], pre[i][1] * m[1]};
        }
        suf[d] = {1.0, 1.0};
        for (int i = d - 1; i >= 0; --i) {
          const auto& m = f2v_t[edges[i]];
          suf[i] = {suf[i + 1][0] * m[0], suf[i + 1][1] * m[1]};
        }
        for (int i = 0; i < d; ++i) {
          grad_f2v[edges[i]][0] += graw[0] * pre[i][0] * suf[i + 1][0];
          grad_f2v[edges[i]][1] += graw[1] * pre[i][1] * suf[i + 1][1];
        }
      }
    }

    // Variable-to-factor normalization backward.
    for (int v = 0; v < ix.n_vars; ++v) {
      const auto edges = ix.incident(v);
      const int d = static_cast<int>(edges.size());
      for (int i = 0; i < d; ++i) {
        const int e = edges[i];
        const auto& gup = grad_v2f[e];
        if (gup[0] == 0.0 && gup[1] == 0.0) continue;
        if (tape.v2f_floored[t - 1][e]) continue;
        const auto& q = tape.v2f[t - 1][e];
        const double s = tape.v2f_sum[t - 1][e];
        const double inner = gup[0] * q[0] + gup[1] * q[1];
        const std::array<double, 2> graw = {(gup[0] - inner) / s, (gup[1] - inner) / s};
        // raw = product of f2v over incident edges except e
        sub.clear();
        for (int j = 0; j < d; ++j) {
          if (j != i) sub.push_back(f2v_t[edges[j]]);
        }
        const int ds = d - 1;
        pre.resize(ds + 1);
        suf.resize(ds + 1);
        pre[0] = {1.0, 1.0};
        for (int j = 0; j < ds; ++j)
          pre[j + 1] = {pre[j][0] * sub[j][0], pre[j][1] * sub[j][1]};
        suf[ds] = {1.0, 1.0};
        for (int j = ds - 1; j >= 0; --j)
          suf[j] = {suf[j + 1][0] * sub[j][0], suf[j + 1][1] * sub[j][1]};
        int sj = 0;
        for (int j = 0; j < d; ++j) {
          if (j == i) continue;
          grad_f2v[edges[j]][0] += graw[0] * pre[sj][0] * suf[sj + 1][0];
          grad_f2v[edges[j]][1] += graw[1] * pre[sj][1] * suf[sj + 1][1];
          ++sj;
        }
      }
    }

    // Factor-to-variable backward into table and previous-round v2f grads.
    const auto& prev_v2f = (t >= 2) ? tape.v2f[t - 2] : tape.v2f0;
    TableSet& gt = grads[tape.shared ? 0 : t - 1];
    const TableSet& tables = tape.tables[tape.shared ? 0 : t - 1];
    std::fill(grad_v2f.begin(), grad_v2f.end(), std::array<double, 2>{0.0, 0.0});
    for (int f = 0; f < ix.n_factors; ++f) {
      const FactorNode& fn = g.factors[f];
      const int e0 = ix.factor_edge_off[f];
      if (fn.kind == FactorKind::unary) {
        gt[f][0] += grad_f2v[e0][0];
        gt[f][1] += grad_f2v[e0][1];
      } else {
        const auto& ga = grad_f2v[e0];
        const auto& gb = grad_f2v[e0 + 1];
        const auto& va = prev_v2f[e0];
        const auto& vb = prev_v2f[e0 + 1];
        const PotentialTable& phi = tables[f];
        for (int sa = 0; sa < 2; ++sa) {
          for (int sb = 0; sb < 2; ++sb) {
            gt[f][sa * 2 + sb] += ga[sa] * vb[sb] + gb[sb] * va[sa];
          }
        }
        grad_v2f[e0][0] += gb[0] * phi[0] + gb[1] * phi[1];
        grad_v2f[e0][1] += gb[0] * phi[2] + gb[1] * phi[3];
        grad_v2f[e0 + 1][0] += ga[0] * phi[0] + ga[1] * phi[2];
        grad_v2f[e0 + 1][1] += ga[0] * phi[1] + ga[1] * phi[3];
      }
    }
  }
  return grads;
}

}  // namespace crfattr
