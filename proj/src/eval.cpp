#include "artsim/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace artsim {

void EvalConfig::validate() const {
  if (k < 1) throw std::invalid_argument("eval k must be >= 1");
  if (phase == Phase::Train)
    throw std::invalid_argument("evaluation phase must be val or test");
}

std::vector<NodeId> rank_candidates(const MatF& embeddings, NodeId query,
                                    std::span<const NodeId> candidates) {
  if (candidates.empty()) throw std::invalid_argument("rank_candidates: empty candidate set");
  const Eigen::Index dim = embeddings.cols();
  std::vector<std::pair<double, NodeId>> keyed;
  keyed.reserve(candidates.size());
  for (NodeId c : candidates) {
    if (c == query)
      throw std::invalid_argument("rank_candidates: query among candidates");
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double d = static_cast<double>(embeddings(query, j)) - embeddings(c, j);
      d2 += d * d;
    }
    keyed.emplace_back(d2, c);
  }
  std::sort(keyed.begin(), keyed.end());  // (distance, id) lexicographic
  std::vector<NodeId> out;
  out.reserve(keyed.size());
  for (const auto& [d2, c] : keyed) out.push_back(c);
  return out;
}

double ndcg_at_k(std::span<const NodeId> ranked, std::span<const NodeId> relevant,
                 std::uint32_t k) {
  if (relevant.empty())
    throw std::invalid_argument("ndcg_at_k: empty relevant set");
  std::vector<NodeId> rel(relevant.begin(), relevant.end());
  std::sort(rel.begin(), rel.end());
  double dcg = 0.0;
  const std::size_t depth = std::min<std::size_t>(k, ranked.size());
  for (std::size_t i = 0; i < depth; ++i)
    if (std::binary_search(rel.begin(), rel.end(), ranked[i]))
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min<std::size_t>(k, rel.size());
  for (std::size_t i = 0; i < ideal; ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

EvalReport evaluate_embeddings(const MatF& embeddings, const Graph& g,
                               const SplitAssignment& split, const EvalConfig& ecfg) {
  ecfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto relevance = hidden_relevance(g, split, ecfg.phase);
  if (relevance.empty())
    throw std::runtime_error(std::string("no hidden ") + phase_name(ecfg.phase) +
                             " edges to evaluate against");
  const Split eval_split = ecfg.phase == Phase::Val ? Split::Val : Split::Test;
  std::vector<NodeId> pool;
  if (ecfg.pool == CandidatePool::SameSplit) {
    pool = split.nodes(eval_split);
  } else {
    pool.resize(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) pool[v] = v;
  }
  EvalReport report;
  report.k = ecfg.k;
  report.phase = ecfg.phase;
  double sum = 0.0;
  for (const auto& [query, relevant] : relevance) {
    std::vector<NodeId> candidates;
    candidates.reserve(pool.size() - 1);
    for (NodeId c : pool)
      if (c != query) candidates.push_back(c);
    auto ranked = rank_candidates(embeddings, query, candidates);
    const double nd = ndcg_at_k(ranked, relevant, ecfg.k);
    report.per_query.emplace_back(query, nd);
    sum += nd;
  }
  report.num_queries = report.per_query.size();
  report.mean_ndcg = sum / static_cast<double>(report.num_queries);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EvalReport evaluate(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
                    const SplitAssignment& split, const FeatureMatrix& X,
                    const EvalConfig& ecfg) {
  ecfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  MatF embeddings = embed_nodes(params, cfg, g, split, ecfg.phase, X);
  EvalReport report = evaluate_embeddings(embeddings, g, split, ecfg);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "query_id,ndcg\n";
  char buf[40];
  for (const auto& [q, nd] : report.per_query) {
    std::snprintf(buf, sizeof buf, "%.17g", nd);
    out << q << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.17g", report.mean_ndcg);
  out << "# mean=" << buf << " n=" << report.num_queries << " k=" << report.k
      << " phase=" << phase_name(report.phase) << '\n';
  if (!out) throw std::runtime_error("eval report write failed");
}

}  // namespace artsim
