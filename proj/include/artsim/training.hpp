#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "artsim/eval.hpp"
#include "artsim/features.hpp"
#include "artsim/graph.hpp"
#include "artsim/model.hpp"
#include "artsim/rng.hpp"

namespace artsim {

/// (anchor, positive) is a visible Train edge; negative is a Train node
/// outside N(anchor) u {anchor} in the Train view.
struct Triplet {
  NodeId anchor;
  NodeId positive;
  NodeId negative;
};

struct TrainConfig {
  double margin = 0.5;
  double lr = 1e-3;
  std::uint32_t triplets_per_batch = 1024;
  std::uint32_t max_epochs = 15;
  std::uint32_t patience = 10;
  std::uint32_t eval_k = 10;
  std::uint64_t seed = 42;

  void validate() const;
};

/// One epoch of triplets: every undirected Train edge contributes two, one
/// per endpoint as anchor, in seeded-shuffled edge order. Negatives are
/// drawn uniformly from Train nodes with rejection of the anchor and its
/// Train-view neighbors (at most 1000 tries per triplet).
std::vector<Triplet> sample_epoch_triplets(const Graph& train_view,
                                           const SplitAssignment& split, Rng& rng);

/// Hinge: max(0, d_ap - d_an + margin).
double triplet_loss(double d_ap, double d_an, double margin);

struct EpochStats {
  std::uint32_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_ndcg = 0.0;
  bool is_best = false;
};

struct FitResult {
  ParamMap params;  // best validation checkpoint
  std::vector<EpochStats> history;
  double initial_val_ndcg = 0.0;  // untrained encoder, epoch 0
  double best_val_ndcg = 0.0;
  std::uint32_t best_epoch = 0;  // 0 means the untrained encoder won
};

/// Trains with Adam on batched triplet loss over full-batch forward passes
/// of the Train view; tracks validation NDCG@eval_k after every epoch,
/// keeps the best-validation parameters and stops after `patience` epochs
/// without improvement.
FitResult fit(const Graph& g, const SplitAssignment& split, const FeatureMatrix& X,
              const EncoderConfig& enc_cfg, const TrainConfig& train_cfg);

// CSV: epoch,train_loss,val_ndcg,best_flag
void write_history_csv(std::ostream& out, const FitResult& result);

}  // namespace artsim
