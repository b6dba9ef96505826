#include "artsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "artsim/tape.hpp"

namespace artsim {

void TrainConfig::validate() const {
  if (margin <= 0) throw std::invalid_argument("margin must be > 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (triplets_per_batch < 1) throw std::invalid_argument("triplets_per_batch must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (eval_k < 1) throw std::invalid_argument("eval_k must be >= 1");
}

std::vector<Triplet> sample_epoch_triplets(const Graph& train_view,
                                           const SplitAssignment& split, Rng& rng) {
  const std::vector<NodeId>& train_nodes = split.nodes(Split::Train);
  auto edges = train_view.edge_list();
  rng.shuffle(edges);
  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * 2);
  auto draw_negative = [&](NodeId anchor) -> NodeId {
    for (int tries = 0; tries < 1000; ++tries) {
      NodeId cand = train_nodes[rng.next_below(train_nodes.size())];
      if (cand != anchor && !train_view.has_edge(anchor, cand)) return cand;
    }
    throw std::runtime_error("negative sampling: rejection cap exceeded for anchor " +
                             std::to_string(anchor) +
                             " (adjacent to all Train nodes?)");
  };
  for (const auto& [u, v] : edges) {
    triplets.push_back({u, v, draw_negative(u)});
    triplets.push_back({v, u, draw_negative(v)});
  }
  return triplets;
}

double triplet_loss(double d_ap, double d_an, double margin) {
  return std::max(0.0, d_ap - d_an + margin);
}

namespace {

ParamMap collect_grads(Tape& tape, const std::map<std::string, TensorId>& ids) {
  ParamMap grads;
  for (const auto& [name, id] : ids) grads.emplace(name, tape.grad(id));
  return grads;
}

}  // namespace

FitResult fit(const Graph& g, const SplitAssignment& split, const FeatureMatrix& X,
              const EncoderConfig& enc_cfg, const TrainConfig& train_cfg) {
  enc_cfg.validate();
  train_cfg.validate();
  if (X.rows() != static_cast<Eigen::Index>(g.num_nodes()))
    throw std::invalid_argument("fit: feature rows != graph nodes");

  const Graph train_view = visible_graph(g, split, Phase::Train);
  if (train_view.num_edges() == 0)
    throw std::runtime_error("fit: Train view has no edges");

  ParamMap params = init_params(enc_cfg, static_cast<std::uint32_t>(X.cols()));
  AdamState adam(AdamConfig{.lr = train_cfg.lr});
  Rng rng(train_cfg.seed);
  const EvalConfig val_cfg{.k = train_cfg.eval_k, .phase = Phase::Val};

  FitResult result;
  result.initial_val_ndcg = evaluate(params, enc_cfg, g, split, X, val_cfg).mean_ndcg;
  result.best_val_ndcg = result.initial_val_ndcg;
  result.best_epoch = 0;
  result.params = params;

  std::uint32_t epochs_since_best = 0;
  const float margin = static_cast<float>(train_cfg.margin);

  for (std::uint32_t epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    const auto triplets = sample_epoch_triplets(train_view, split, rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t at = 0; at < triplets.size(); at += train_cfg.triplets_per_batch) {
      const std::size_t count =
          std::min<std::size_t>(train_cfg.triplets_per_batch, triplets.size() - at);
      std::vector<std::uint32_t> anchors(count), positives(count), negatives(count);
      for (std::size_t i = 0; i < count; ++i) {
        anchors[i] = triplets[at + i].anchor;
        positives[i] = triplets[at + i].positive;
        negatives[i] = triplets[at + i].negative;
      }
      Tape tape;
      auto ids = bind_params(tape, params, /*trainable=*/true);
      TensorId x = tape.constant(X);
      TensorId emb = encoder_forward(tape, ids, enc_cfg, train_view, x);
      TensorId a = tape.gather_rows(emb, std::move(anchors));
      TensorId p = tape.gather_rows(emb, std::move(positives));
      TensorId n = tape.gather_rows(emb, std::move(negatives));
      TensorId d_ap = tape.row_l2_distance(a, p);
      TensorId d_an = tape.row_l2_distance(a, n);
      TensorId loss = tape.mean_all(tape.relu(tape.add_scalar(tape.sub(d_ap, d_an), margin)));
      const double loss_value = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_value))
        throw std::runtime_error("fit: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_index));
      loss_sum += loss_value * static_cast<double>(count);
      tape.backward(loss);
      ParamMap grads = collect_grads(tape, ids);
      adam.step(params, grads);
      ++batch_index;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(triplets.size());
    stats.val_ndcg = evaluate(params, enc_cfg, g, split, X, val_cfg).mean_ndcg;
    stats.is_best = stats.val_ndcg > result.best_val_ndcg;
    if (stats.is_best) {
      result.best_val_ndcg = stats.val_ndcg;
      result.best_epoch = epoch;
      result.params = params;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    result.history.push_back(stats);
    if (epochs_since_best >= train_cfg.patience) break;
  }
  return result;
}

void write_history_csv(std::ostream& out, const FitResult& result) {
  out << "epoch,train_loss,val_ndcg,best_flag\n";
  char a[40], b[40];
  for (const auto& e : result.history) {
    std::snprintf(a, sizeof a, "%.17g", e.train_loss);
    std::snprintf(b, sizeof b, "%.17g", e.val_ndcg);
    out << e.epoch << ',' << a << ',' << b << ',' << (e.is_best ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("history write failed");
}

}  // namespace artsim
