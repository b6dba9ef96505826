#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artsim/features.hpp"
#include "artsim/graph.hpp"
#include "artsim/model.hpp"

namespace artsim {

enum class CandidatePool : std::uint8_t { SameSplit, AllNodes };

struct EvalConfig {
  std::uint32_t k = 10;  // 200 is the large-catalog convention
  Phase phase = Phase::Test;
  CandidatePool pool = CandidatePool::SameSplit;

  void validate() const;
};

struct EvalReport {
  double mean_ndcg = 0.0;
  std::size_t num_queries = 0;
  std::uint32_t k = 0;
  Phase phase = Phase::Test;
  std::vector<std::pair<NodeId, double>> per_query;  // ascending query id
  double wall_time_sec = 0.0;
};

/// Candidates sorted by ascending Euclidean distance to the query embedding;
/// ties broken by ascending NodeId. Distances accumulate in 64-bit.
std::vector<NodeId> rank_candidates(const MatF& embeddings, NodeId query,
                                    std::span<const NodeId> candidates);

/// Binary-relevance NDCG@k with 1-indexed log2(i+1) discounts. `relevant`
/// must be non-empty.
double ndcg_at_k(std::span<const NodeId> ranked, std::span<const NodeId> relevant,
                 std::uint32_t k);

/// Embeds over the phase-visible view, queries every eval node that has a
/// hidden same-split edge, ranks candidates from the same split (minus the
/// query) and averages NDCG@k over queries in ascending id order.
EvalReport evaluate(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
                    const SplitAssignment& split, const FeatureMatrix& X,
                    const EvalConfig& ecfg);

/// As evaluate(), but with precomputed embeddings (rows aligned to nodes).
EvalReport evaluate_embeddings(const MatF& embeddings, const Graph& g,
                               const SplitAssignment& split, const EvalConfig& ecfg);

// CSV: "query_id,ndcg" rows, then a "# mean=..." summary comment.
void write_eval_csv(std::ostream& out, const EvalReport& report);

}  // namespace artsim
