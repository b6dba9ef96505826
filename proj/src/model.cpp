#include "artsim/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace artsim {

const char* layer_kind_name(LayerKind k) {
  return k == LayerKind::Sage ? "sage" : "gin";
}

LayerKind parse_layer_kind(const std::string& s) {
  if (s == "sage") return LayerKind::Sage;
  if (s == "gin") return LayerKind::Gin;
  throw std::invalid_argument("unknown layer kind '" + s + "' (expected sage|gin)");
}

void EncoderConfig::validate() const {
  if (num_graph_layers > 4)
    throw std::invalid_argument("num_graph_layers must be in 0..4, got " +
                                std::to_string(num_graph_layers));
  if (hidden_dim < 1 || embed_dim < 1)
    throw std::invalid_argument("encoder dims must be >= 1");
  if (fc_layers < 1) throw std::invalid_argument("fc_layers must be >= 1");
}

std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> param_shapes(
    const EncoderConfig& cfg, std::uint32_t in_dim) {
  cfg.validate();
  if (in_dim < 1) throw std::invalid_argument("input feature dim must be >= 1");
  std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> shapes;
  const std::uint32_t h = cfg.hidden_dim;
  shapes["input.w"] = {in_dim, h};
  shapes["input.b"] = {1, h};
  for (std::uint32_t l = 0; l < cfg.num_graph_layers; ++l) {
    if (cfg.layer_kind == LayerKind::Sage) {
      const std::string p = "sage" + std::to_string(l);
      shapes[p + ".self.w"] = {h, h};
      shapes[p + ".neigh.w"] = {h, h};
      shapes[p + ".b"] = {1, h};
    } else {
      const std::string p = "gin" + std::to_string(l);
      shapes[p + ".mlp0.w"] = {h, h};
      shapes[p + ".mlp0.b"] = {1, h};
      shapes[p + ".mlp1.w"] = {h, h};
      shapes[p + ".mlp1.b"] = {1, h};
    }
  }
  for (std::uint32_t l = 0; l < cfg.fc_layers; ++l) {
    const std::string p = "head" + std::to_string(l);
    const std::uint32_t out = (l + 1 == cfg.fc_layers) ? cfg.embed_dim : h;
    shapes[p + ".w"] = {h, out};
    shapes[p + ".b"] = {1, out};
  }
  return shapes;
}

namespace {

MatF glorot(Rng& rng, std::uint32_t rows, std::uint32_t cols) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(rows) + cols));
  MatF m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = static_cast<float>(rng.uniform(-bound, bound));
  return m;
}

}  // namespace

ParamMap init_params(const EncoderConfig& cfg, std::uint32_t in_dim) {
  cfg.validate();
  Rng rng(cfg.seed);
  ParamMap params;
  // Weights are drawn in pipeline order (input, graph layers, head), not in
  // map order, so the stream layout is stable as layers are added.
  auto weight = [&](const std::string& name, std::uint32_t r, std::uint32_t c) {
    params.emplace(name, glorot(rng, r, c));
  };
  auto bias = [&](const std::string& name, std::uint32_t c) {
    params.emplace(name, MatF::Zero(1, c));
  };
  const std::uint32_t h = cfg.hidden_dim;
  weight("input.w", in_dim, h);
  bias("input.b", h);
  for (std::uint32_t l = 0; l < cfg.num_graph_layers; ++l) {
    if (cfg.layer_kind == LayerKind::Sage) {
      const std::string p = "sage" + std::to_string(l);
      weight(p + ".self.w", h, h);
      weight(p + ".neigh.w", h, h);
      bias(p + ".b", h);
    } else {
      const std::string p = "gin" + std::to_string(l);
      weight(p + ".mlp0.w", h, h);
      bias(p + ".mlp0.b", h);
      weight(p + ".mlp1.w", h, h);
      bias(p + ".mlp1.b", h);
    }
  }
  for (std::uint32_t l = 0; l < cfg.fc_layers; ++l) {
    const std::string p = "head" + std::to_string(l);
    const std::uint32_t out = (l + 1 == cfg.fc_layers) ? cfg.embed_dim : h;
    weight(p + ".w", h, out);
    bias(p + ".b", out);
  }
  return params;
}

void check_param_shapes(const ParamMap& params, const EncoderConfig& cfg,
                        std::uint32_t in_dim) {
  auto expected = param_shapes(cfg, in_dim);
  std::ostringstream problems;
  for (const auto& [name, shape] : expected) {
    auto it = params.find(name);
    if (it == params.end()) {
      problems << "  missing tensor '" << name << "' (expected " << shape.first << "x"
               << shape.second << ")\n";
      continue;
    }
    if (it->second.rows() != static_cast<Eigen::Index>(shape.first) ||
        it->second.cols() != static_cast<Eigen::Index>(shape.second))
      problems << "  tensor '" << name << "': expected " << shape.first << "x"
               << shape.second << ", found " << it->second.rows() << "x"
               << it->second.cols() << "\n";
  }
  for (const auto& [name, m] : params)
    if (!expected.count(name))
      problems << "  unexpected tensor '" << name << "' (" << m.rows() << "x"
               << m.cols() << ")\n";
  const std::string msg = problems.str();
  if (!msg.empty())
    throw std::runtime_error("checkpoint does not match encoder config:\n" + msg);
}

MatF encode(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
            const FeatureMatrix& X) {
  if (X.rows() != static_cast<Eigen::Index>(g.num_nodes()))
    throw std::invalid_argument("encode: feature rows != graph nodes");
  Tape tape;
  auto ids = bind_params(tape, params, /*trainable=*/false);
  TensorId x = tape.constant(X);
  TensorId out = encoder_forward(tape, ids, cfg, g, x);
  return tape.value(out);
}

MatF embed_nodes(const ParamMap& params, const EncoderConfig& cfg, const Graph& g,
                 const SplitAssignment& split, Phase phase, const FeatureMatrix& X) {
  return encode(params, cfg, visible_graph(g, split, phase), X);
}

KvFile ModelInfo::to_kv() const {
  KvFile kv;
  kv.set("layers", std::to_string(encoder.num_graph_layers));
  kv.set("layer_kind", layer_kind_name(encoder.layer_kind));
  kv.set("hidden_dim", std::to_string(encoder.hidden_dim));
  kv.set("embed_dim", std::to_string(encoder.embed_dim));
  kv.set("fc_layers", std::to_string(encoder.fc_layers));
  kv.set("seed", std::to_string(encoder.seed));
  kv.set("in_dim", std::to_string(in_dim));
  kv.set("features", features);
  return kv;
}

ModelInfo ModelInfo::from_kv(const KvFile& kv) {
  ModelInfo info;
  info.encoder.num_graph_layers = static_cast<std::uint32_t>(std::stoul(kv.get("layers")));
  info.encoder.layer_kind = parse_layer_kind(kv.get("layer_kind"));
  info.encoder.hidden_dim = static_cast<std::uint32_t>(std::stoul(kv.get("hidden_dim")));
  info.encoder.embed_dim = static_cast<std::uint32_t>(std::stoul(kv.get("embed_dim")));
  info.encoder.fc_layers = static_cast<std::uint32_t>(std::stoul(kv.get("fc_layers")));
  info.encoder.seed = std::stoull(kv.get("seed"));
  info.in_dim = static_cast<std::uint32_t>(std::stoul(kv.get("in_dim")));
  info.features = kv.get("features");
  return info;
}

}  // namespace artsim
