#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "artsim/adam.hpp"
#include "artsim/features.hpp"
#include "artsim/graph.hpp"
#include "artsim/kv.hpp"
#include "artsim/rng.hpp"
#include "artsim/tape.hpp"

namespace artsim {

enum class LayerKind : std::uint8_t { Sage, Gin };

const char* layer_kind_name(LayerKind k);
LayerKind parse_layer_kind(const std::string& s);

/// Encoder: input projection, 0..4 graph layers (SAGE mean-aggregation with
/// separate self/neighbor weights, or GIN with a two-layer MLP and fixed
/// epsilon 0), then a fully connected head whose last layer is linear.
struct EncoderConfig {
  std::uint32_t num_graph_layers = 2;  // 0..4
  LayerKind layer_kind = LayerKind::Sage;
  std::uint32_t hidden_dim = 256;
  std::uint32_t embed_dim = 128;
  std::uint32_t fc_layers = 2;  // head depth; fc_layers-1 relu layers + 1 linear
  std::uint64_t seed = 42;

  void validate() const;
};

/// Expected tensor names and shapes for a config and input feature width.
std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> param_shapes(
    const EncoderConfig& cfg, std::uint32_t in_dim);

/// Glorot-uniform weights, zero biases, drawn from the seeded portable
/// generator in a fixed creation order; bit-reproducible per seed.
ParamMap init_params(const EncoderConfig& cfg, std::uint32_t in_dim);

/// Throws a diagnostic listing expected vs found shapes when `params` does
/// not match the config.
void check_param_shapes(const ParamMap& params, const EncoderConfig& cfg,
                        std::uint32_t in_dim);

template <class S>
std::map<std::string, TensorId> bind_params(TapeT<S>& tape, const ParamMapT<S>& params,
                                            bool trainable) {
  std::map<std::string, TensorId> ids;
  for (const auto& [name, m] : params)
    ids.emplace(name, trainable ? tape.variable(m) : tape.constant(m));
  return ids;
}

template <class To, class From>
ParamMapT<To> cast_params(const ParamMapT<From>& params) {
  ParamMapT<To> out;
  for (const auto& [name, m] : params) out.emplace(name, m.template cast<To>());
  return out;
}

/// Records the full encoder forward pass on the tape and returns the
/// embedding node (num_nodes x embed_dim).
template <class S>
TensorId encoder_forward(TapeT<S>& tape, const std::map<std::string, TensorId>& p,
                         const EncoderConfig& cfg, const Graph& g, TensorId x);

/// Plain forward pass without gradient tracking.
MatF encode(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
            const FeatureMatrix& X);

/// Embeddings for ranking in a given phase: forward over the phase-visible
/// view, so eval nodes receive messages only over visible edges.
MatF embed_nodes(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
                 const SplitAssignment& split, Phase phase, const FeatureMatrix& X);

/// Encoder config plus everything needed to rebuild the eval-time input
/// pipeline; serialized as key=value text next to the checkpoint.
struct ModelInfo {
  EncoderConfig encoder;
  std::uint32_t in_dim = 0;
  std::string features;  // tier spec, e.g. "clap_like+tags_like"

  KvFile to_kv() const;
  static ModelInfo from_kv(const KvFile& kv);
};

// --- template implementation ---

template <class S>
TensorId encoder_forward(TapeT<S>& tape, const std::map<std::string, TensorId>& p,
                         const EncoderConfig& cfg, const Graph& g, TensorId x) {
  cfg.validate();
  auto id = [&p](const std::string& name) {
    auto it = p.find(name);
    if (it == p.end())
      throw std::invalid_argument("encoder_forward: missing parameter '" + name + "'");
    return it->second;
  };

  TensorId h = tape.relu(
      tape.add_rowvec_bias(tape.matmul(x, id("input.w")), id("input.b")));

  for (std::uint32_t l = 0; l < cfg.num_graph_layers; ++l) {
    const std::string prefix =
        (cfg.layer_kind == LayerKind::Sage ? "sage" : "gin") + std::to_string(l);
    if (cfg.layer_kind == LayerKind::Sage) {
      TensorId self_term = tape.matmul(h, id(prefix + ".self.w"));
      TensorId neigh_term = tape.matmul(tape.csr_mean_neighbors(h, g), id(prefix + ".neigh.w"));
      h = tape.relu(tape.add_rowvec_bias(tape.add(self_term, neigh_term), id(prefix + ".b")));
    } else {
      // epsilon fixed at 0: self + neighbor sum, then a 2-layer MLP.
      TensorId z = tape.add(h, tape.csr_sum_neighbors(h, g));
      TensorId hidden = tape.relu(
          tape.add_rowvec_bias(tape.matmul(z, id(prefix + ".mlp0.w")), id(prefix + ".mlp0.b")));
      h = tape.add_rowvec_bias(tape.matmul(hidden, id(prefix + ".mlp1.w")), id(prefix + ".mlp1.b"));
    }
  }

  for (std::uint32_t l = 0; l + 1 < cfg.fc_layers; ++l) {
    const std::string prefix = "head" + std::to_string(l);
    h = tape.relu(tape.add_rowvec_bias(tape.matmul(h, id(prefix + ".w")), id(prefix + ".b")));
  }
  const std::string last = "head" + std::to_string(cfg.fc_layers - 1);
  return tape.add_rowvec_bias(tape.matmul(h, id(last + ".w")), id(last + ".b"));
}

}  // namespace artsim
