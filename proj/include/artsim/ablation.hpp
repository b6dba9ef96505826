#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "artsim/eval.hpp"
#include "artsim/graph.hpp"
#include "artsim/model.hpp"
#include "artsim/training.hpp"

namespace artsim {

/// Sweep over graph-layer depth x feature sets x seeds with otherwise fixed
/// encoder/train configs.
struct AblationGrid {
  std::vector<std::string> feature_sets{"clap_like", "acoustic_like", "tags_like", "random"};
  std::vector<std::uint32_t> layer_counts{0, 1, 2, 3, 4};
  std::uint32_t num_seeds = 3;
  std::uint64_t base_seed = 42;
  EncoderConfig encoder;  // layer count and seed overridden per cell
  TrainConfig train;      // seed overridden per cell

  void validate() const;
};

struct AblationRow {
  std::string features;
  std::uint32_t layers = 0;
  std::uint64_t seed = 0;
  double test_ndcg = 0.0;
  double seconds = 0.0;  // train+eval wall time for this cell
  bool failed = false;
  std::string error;
};

struct AblationAggregate {
  std::string features;
  std::uint32_t layers = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population; 0 for a single seed
  std::uint32_t count = 0;
};

struct AblationResult {
  std::vector<AblationRow> rows;  // grid order: features, layers, seed
  std::vector<AblationAggregate> aggregates;
  double total_seconds = 0.0;

  bool any_failed() const;
  const AblationAggregate& cell(const std::string& features, std::uint32_t layers) const;
};

/// Runs every grid cell (optionally on a small worker pool; results are
/// merged in grid order so the output is schedule-independent). The
/// materializer maps a feature-set name like "clap_like+tags_like" to the
/// node-feature matrix used for that cell.
AblationResult run_ablation(
    const Graph& g, const SplitAssignment& split, const AblationGrid& grid,
    const std::function<FeatureMatrix(const std::string&)>& materialize_features,
    unsigned num_workers = 1);

/// "name[+name...]" -> standardized concatenation of <dir>/<name>.ftrx tiers.
FeatureSpec parse_feature_names(const std::string& names, const std::string& data_dir);

// CSV: header "kind,features,layers,seed,test_ndcg"; one "run" row per
// successful cell, then "mean"/"std" aggregate rows (empty seed column).
void write_ablation_csv(std::ostream& out, const AblationResult& result);
AblationResult parse_ablation_csv(std::istream& in);

}  // namespace artsim
