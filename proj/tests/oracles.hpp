#pragma once

// Test-only oracles and generators, independent of the library's
// implementation paths they are used to check. No test-framework
// dependencies; misuse throws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "artsim/eval.hpp"
#include "artsim/graph.hpp"
#include "artsim/mat.hpp"
#include "artsim/rng.hpp"
#include "artsim/tape.hpp"

namespace artsim::testing {

inline Graph random_graph(std::uint64_t seed, NodeId num_nodes, double edge_prob) {
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < num_nodes; ++u)
    for (NodeId v = u + 1; v < num_nodes; ++v)
      if (rng.next_double() < edge_prob) edges.emplace_back(u, v);
  return Graph::from_edges(num_nodes, edges);
}

inline SplitAssignment random_split(std::uint64_t seed, NodeId num_nodes) {
  Rng rng(seed);
  std::vector<Split> labels(num_nodes);
  labels[0] = Split::Train;
  labels[1 % num_nodes] = Split::Val;
  labels[2 % num_nodes] = Split::Test;
  for (NodeId v = 3; v < num_nodes; ++v) {
    const double r = rng.next_double();
    labels[v] = r < 0.6 ? Split::Train : (r < 0.8 ? Split::Val : Split::Test);
  }
  return SplitAssignment(std::move(labels));
}

inline std::set<std::pair<NodeId, NodeId>> edge_set(const Graph& g) {
  auto list = g.edge_list();
  return {list.begin(), list.end()};
}

inline MatD random_mat(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  MatD m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

inline MatF random_matf(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Rng rng(seed);
  MatF m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

/// Brute-force NDCG: dense double distance row, stable full sort with the
/// (distance, id) tie rule, direct DCG evaluation.
inline double brute_force_ndcg(const MatF& emb, NodeId query,
                               const std::vector<NodeId>& candidates,
                               const std::vector<NodeId>& relevant, std::uint32_t k) {
  std::vector<std::pair<double, NodeId>> order;
  order.reserve(candidates.size());
  for (NodeId c : candidates) {
    double d2 = 0;
    for (Eigen::Index j = 0; j < emb.cols(); ++j) {
      const double d = static_cast<double>(emb(query, j)) - emb(c, j);
      d2 += d * d;
    }
    order.emplace_back(d2, c);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) {
                     return a.first < b.first ||
                            (a.first == b.first && a.second < b.second);
                   });
  double dcg = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(k, order.size()); ++i)
    if (std::find(relevant.begin(), relevant.end(), order[i].second) != relevant.end())
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double idcg = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(k, relevant.size()); ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

/// Brute-force counterpart of evaluate_embeddings (same-split pool).
inline std::vector<std::pair<NodeId, double>> brute_force_eval(
    const MatF& emb, const Graph& g, const SplitAssignment& split, Phase phase,
    std::uint32_t k) {
  auto rel = hidden_relevance(g, split, phase);
  const Split want = phase == Phase::Val ? Split::Val : Split::Test;
  std::vector<std::pair<NodeId, double>> out;
  for (const auto& [q, relevant] : rel) {
    std::vector<NodeId> cands;
    for (NodeId c : split.nodes(want))
      if (c != q) cands.push_back(c);
    out.emplace_back(q, brute_force_ndcg(emb, q, cands, relevant, k));
  }
  return out;
}

/// Central finite-difference gradient check of a scalar tape program; the
/// max relative error over all input entries.
inline double gradient_check(
    const std::vector<MatD>& inputs,
    const std::function<TensorId(TapeT<double>&, const std::vector<TensorId>&)>& build,
    double h = 1e-5) {
  TapeT<double> tape;
  std::vector<TensorId> ids;
  ids.reserve(inputs.size());
  for (const auto& m : inputs) ids.push_back(tape.variable(m));
  const TensorId out = build(tape, ids);
  if (tape.value(out).size() != 1)
    throw std::logic_error("gradient_check: program output is not scalar");
  tape.backward(out);

  auto eval_at = [&](const std::vector<MatD>& pts) {
    TapeT<double> t2;
    std::vector<TensorId> ids2;
    for (const auto& m : pts) ids2.push_back(t2.constant(m));
    return t2.value(build(t2, ids2))(0, 0);
  };

  double max_rel = 0.0;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const MatD& g = tape.grad(ids[p]);
    for (Eigen::Index i = 0; i < inputs[p].rows(); ++i)
      for (Eigen::Index j = 0; j < inputs[p].cols(); ++j) {
        std::vector<MatD> plus = inputs, minus = inputs;
        plus[p](i, j) += h;
        minus[p](i, j) -= h;
        const double fd = (eval_at(plus) - eval_at(minus)) / (2 * h);
        const double ad = g(i, j);
        const double rel = std::abs(ad - fd) / std::max(1.0, std::abs(ad) + std::abs(fd));
        max_rel = std::max(max_rel, rel);
      }
  }
  return max_rel;
}

/// Random 3..5-primitive compositions over small matrices plus graph
/// aggregation, ending in mean_all. Draws landing near a relu or distance
/// kink (where finite differences are invalid) are rejected.
struct CompositionCase {
  std::vector<MatD> inputs;
  std::function<TensorId(TapeT<double>&, const std::vector<TensorId>&)> build;
};

inline bool make_random_composition(std::uint64_t seed, const Graph& g,
                                    CompositionCase& out) {
  Rng rng(seed);
  const Eigen::Index n = g.num_nodes();
  const Eigen::Index d0 = 2 + static_cast<Eigen::Index>(rng.next_below(3));
  std::vector<MatD> inputs;
  inputs.push_back(random_mat(rng, n, d0));
  inputs.push_back(random_mat(rng, d0, d0));  // square mixing weight
  inputs.push_back(random_mat(rng, 1, d0));   // bias row
  const int steps = 3 + static_cast<int>(rng.next_below(3));
  std::vector<int> ops;
  for (int s = 0; s < steps; ++s) ops.push_back(static_cast<int>(rng.next_below(9)));

  auto record = [ops, &g](TapeT<double>& tape, const std::vector<TensorId>& ids,
                          std::vector<TensorId>* relu_inputs,
                          std::vector<TensorId>* dist_outputs) {
    TensorId h = ids[0];
    const TensorId w = ids[1];
    const TensorId b = ids[2];
    const TensorId partner = ids[0];
    for (int op : ops) {
      switch (op) {
        case 0: h = tape.matmul(h, w); break;
        case 1:
          if (relu_inputs) relu_inputs->push_back(h);
          h = tape.relu(h);
          break;
        case 2: h = tape.add_rowvec_bias(h, b); break;
        case 3: h = tape.add(h, partner); break;
        case 4: h = tape.sub(h, partner); break;
        case 5: h = tape.scale(h, 0.7); break;
        case 6: h = tape.add_scalar(h, 0.3); break;
        case 7: h = tape.csr_mean_neighbors(h, g); break;
        case 8: h = tape.csr_sum_neighbors(h, g); break;
      }
    }
    TensorId d = tape.row_l2_distance(h, partner);
    if (dist_outputs) dist_outputs->push_back(d);
    if (relu_inputs) relu_inputs->push_back(h);
    return tape.mean_all(tape.concat_cols(d, tape.relu(h)));
  };

  TapeT<double> probe;
  std::vector<TensorId> ids;
  for (const auto& m : inputs) ids.push_back(probe.constant(m));
  std::vector<TensorId> relu_inputs, dist_outputs;
  record(probe, ids, &relu_inputs, &dist_outputs);
  for (TensorId id : relu_inputs)
    if ((probe.value(id).array().abs() < 1e-3).any()) return false;
  for (TensorId id : dist_outputs)
    if ((probe.value(id).array() < 1e-2).any()) return false;

  out.inputs = std::move(inputs);
  out.build = [record](TapeT<double>& tape, const std::vector<TensorId>& ids) {
    return record(tape, ids, nullptr, nullptr);
  };
  return true;
}

}  // namespace artsim::testing
