#include "artsim/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "artsim/rng.hpp"

namespace fs = std::filesystem;

namespace artsim {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_nodes < 10) throw std::invalid_argument("num_nodes must be >= 10");
  if (num_communities < 2 || num_communities > num_nodes)
    throw std::invalid_argument("num_communities must be in [2, num_nodes]");
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
  if (knn_edges < 1) throw std::invalid_argument("knn_edges must be >= 1");
  if (noise_edge_fraction < 0) throw std::invalid_argument("noise_edge_fraction must be >= 0");
  if (latent_noise < 0 || sigma_clap < 0 || sigma_acoustic < 0)
    throw std::invalid_argument("noise levels must be >= 0");
  if (tag_flip_prob < 0 || tag_flip_prob > 1)
    throw std::invalid_argument("tag_flip_prob must be in [0, 1]");
  if (dim_clap < 1 || dim_acoustic < 1 || dim_random < 1)
    throw std::invalid_argument("tier dims must be >= 1");
  if (std::abs(frac_train + frac_val + frac_test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  const double n = num_nodes;
  if (frac_train * n < 1 || frac_val * n < 1 || frac_test * n < 1)
    throw std::invalid_argument("every split class must get at least one node");
  if (clap_identity_lift && dim_clap != latent_dim)
    throw std::invalid_argument("clap_identity_lift requires dim_clap == latent_dim");
}

KvFile SynthConfig::to_kv() const {
  KvFile kv;
  kv.set("num_nodes", std::to_string(num_nodes));
  kv.set("num_communities", std::to_string(num_communities));
  kv.set("latent_dim", std::to_string(latent_dim));
  kv.set("knn_edges", std::to_string(knn_edges));
  kv.set("noise_edge_fraction", fmt_num(noise_edge_fraction));
  kv.set("latent_noise", fmt_num(latent_noise));
  kv.set("sigma_clap", fmt_num(sigma_clap));
  kv.set("sigma_acoustic", fmt_num(sigma_acoustic));
  kv.set("tag_flip_prob", fmt_num(tag_flip_prob));
  kv.set("dim_clap", std::to_string(dim_clap));
  kv.set("dim_acoustic", std::to_string(dim_acoustic));
  kv.set("dim_random", std::to_string(dim_random));
  kv.set("frac_train", fmt_num(frac_train));
  kv.set("frac_val", fmt_num(frac_val));
  kv.set("frac_test", fmt_num(frac_test));
  kv.set("seed", std::to_string(seed));
  kv.set("clap_identity_lift", clap_identity_lift ? "1" : "0");
  return kv;
}

SynthConfig SynthConfig::from_kv(const KvFile& kv) {
  SynthConfig c;
  const SynthConfig defaults;
  auto u32 = [&](const char* key, std::uint32_t dflt) {
    return kv.has(key) ? static_cast<std::uint32_t>(std::stoul(kv.get(key))) : dflt;
  };
  auto f64 = [&](const char* key, double dflt) {
    return kv.has(key) ? std::stod(kv.get(key)) : dflt;
  };
  c.num_nodes = u32("num_nodes", defaults.num_nodes);
  c.num_communities = u32("num_communities", defaults.num_communities);
  c.latent_dim = u32("latent_dim", defaults.latent_dim);
  c.knn_edges = u32("knn_edges", defaults.knn_edges);
  c.noise_edge_fraction = f64("noise_edge_fraction", defaults.noise_edge_fraction);
  c.latent_noise = f64("latent_noise", defaults.latent_noise);
  c.sigma_clap = f64("sigma_clap", defaults.sigma_clap);
  c.sigma_acoustic = f64("sigma_acoustic", defaults.sigma_acoustic);
  c.tag_flip_prob = f64("tag_flip_prob", defaults.tag_flip_prob);
  c.dim_clap = u32("dim_clap", defaults.dim_clap);
  c.dim_acoustic = u32("dim_acoustic", defaults.dim_acoustic);
  c.dim_random = u32("dim_random", defaults.dim_random);
  c.frac_train = f64("frac_train", defaults.frac_train);
  c.frac_val = f64("frac_val", defaults.frac_val);
  c.frac_test = f64("frac_test", defaults.frac_test);
  c.seed = kv.has("seed") ? std::stoull(kv.get("seed")) : defaults.seed;
  c.clap_identity_lift = kv.get_or("clap_identity_lift", "0") == "1";
  const char* known[] = {"num_nodes", "num_communities", "latent_dim", "knn_edges",
                         "noise_edge_fraction", "latent_noise", "sigma_clap",
                         "sigma_acoustic", "tag_flip_prob", "dim_clap", "dim_acoustic",
                         "dim_random", "frac_train", "frac_val", "frac_test", "seed",
                         "clap_identity_lift"};
  for (const auto& [key, value] : kv.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::runtime_error("unknown generator config key '" + key + "'");
  }
  return c;
}

namespace {

// The clap lift keeps SNR unchanged (noise enters before the lift); the
// acoustic projection is deliberately weak so the fixed post-projection
// noise erodes community separability, placing the tier between clap_like
// and tags_like on the informativeness probe.
constexpr double kAcousticProjGain = 0.5;

MatF gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  MatF m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<float>(scale * rng.gaussian());
  return m;
}

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// k nearest neighbors per node in latent space (squared Euclidean in
// 64-bit, ties by ascending id).
std::vector<std::vector<NodeId>> knn_lists(const MatF& latent, std::uint32_t k) {
  const NodeId n = static_cast<NodeId>(latent.rows());
  const Eigen::Index d = latent.cols();
  std::vector<std::vector<NodeId>> knn(n);
  std::vector<std::pair<double, NodeId>> cand;
  cand.reserve(n - 1);
  for (NodeId u = 0; u < n; ++u) {
    cand.clear();
    for (NodeId v = 0; v < n; ++v) {
      if (v == u) continue;
      double d2 = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = static_cast<double>(latent(u, j)) - latent(v, j);
        d2 += diff * diff;
      }
      cand.emplace_back(d2, v);
    }
    const std::size_t kk = std::min<std::size_t>(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end());
    knn[u].reserve(kk);
    for (std::size_t i = 0; i < kk; ++i) knn[u].push_back(cand[i].second);
    std::sort(knn[u].begin(), knn[u].end());
  }
  return knn;
}

}  // namespace

SynthInstance generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const NodeId n = cfg.num_nodes;
  const std::uint32_t k = cfg.num_communities;

  // Fixed draw order: centroids, latents, lift, clap noise, projection,
  // acoustic noise, tag flips, random tier, noise edges, split shuffles.
  std::vector<std::uint32_t> communities(n);
  for (NodeId i = 0; i < n; ++i) communities[i] = i % k;

  MatF centroids = gaussian_matrix(rng, k, cfg.latent_dim, 1.0);
  MatF latent(n, cfg.latent_dim);
  for (NodeId i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < latent.cols(); ++j)
      latent(i, j) = centroids(communities[i], j) +
                     static_cast<float>(cfg.latent_noise * rng.gaussian());

  std::map<std::string, FeatureMatrix> tiers;

  {
    MatF lift;
    if (!cfg.clap_identity_lift)
      lift = gaussian_matrix(rng, cfg.latent_dim, cfg.dim_clap,
                             1.0 / std::sqrt(static_cast<double>(cfg.latent_dim)));
    MatF noised(n, cfg.latent_dim);
    for (NodeId i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < noised.cols(); ++j)
        noised(i, j) = latent(i, j) + static_cast<float>(cfg.sigma_clap * rng.gaussian());
    tiers["clap_like"] = cfg.clap_identity_lift ? noised : MatF(noised * lift);
  }

  {
    MatF proj = gaussian_matrix(rng, cfg.latent_dim, cfg.dim_acoustic,
                                kAcousticProjGain / std::sqrt(static_cast<double>(cfg.latent_dim)));
    MatF acoustic = latent * proj;
    for (Eigen::Index i = 0; i < acoustic.rows(); ++i)
      for (Eigen::Index j = 0; j < acoustic.cols(); ++j)
        acoustic(i, j) += static_cast<float>(cfg.sigma_acoustic * rng.gaussian());
    tiers["acoustic_like"] = std::move(acoustic);
  }

  {
    MatF tags = MatF::Zero(n, k);
    for (NodeId i = 0; i < n; ++i) tags(i, communities[i]) = 1.0f;
    for (NodeId i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < tags.cols(); ++j)
        if (rng.next_double() < cfg.tag_flip_prob) tags(i, j) = 1.0f - tags(i, j);
    tiers["tags_like"] = std::move(tags);
  }

  {
    MatF rnd(n, cfg.dim_random);
    for (Eigen::Index i = 0; i < rnd.rows(); ++i)
      for (Eigen::Index j = 0; j < rnd.cols(); ++j)
        rnd(i, j) = static_cast<float>(rng.uniform(-1.0, 1.0));
    tiers["random"] = std::move(rnd);
  }

  // Mutual kNN edges.
  auto knn = knn_lists(latent, cfg.knn_edges * 3);  // TEMP experiment
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::unordered_set<std::uint64_t> present;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v : knn[u])
      if (u < v && std::binary_search(knn[v].begin(), knn[v].end(), u)) {
        edges.emplace_back(u, v);
        present.insert(edge_key(u, v));
      }

  // Uniform noise edges on top.
  const std::size_t target =
      static_cast<std::size_t>(std::llround(cfg.noise_edge_fraction *
                                            static_cast<double>(edges.size())));
  std::size_t added = 0, attempts = 0;
  const std::size_t max_attempts = 200 * target + 100;
  while (added < target && attempts < max_attempts) {
    ++attempts;
    NodeId u = static_cast<NodeId>(rng.next_below(n));
    NodeId v = static_cast<NodeId>(rng.next_below(n));
    if (u == v) continue;
    if (!present.insert(edge_key(u, v)).second) continue;
    edges.emplace_back(std::min(u, v), std::max(u, v));
    ++added;
  }

  // Stratified split: shuffle within each community, then consume
  // round-robin so every community contributes proportionally.
  std::vector<std::vector<NodeId>> members(k);
  for (NodeId i = 0; i < n; ++i) members[communities[i]].push_back(i);
  for (auto& m : members) rng.shuffle(m);
  std::vector<NodeId> order;
  order.reserve(n);
  for (std::size_t round = 0; order.size() < n; ++round)
    for (std::uint32_t c = 0; c < k; ++c)
      if (round < members[c].size()) order.push_back(members[c][round]);
  const std::size_t t_train = static_cast<std::size_t>(std::llround(cfg.frac_train * n));
  const std::size_t t_val = static_cast<std::size_t>(std::llround(cfg.frac_val * n));
  std::vector<Split> labels(n, Split::Test);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < t_train) labels[order[i]] = Split::Train;
    else if (i < t_train + t_val) labels[order[i]] = Split::Val;
  }

  return SynthInstance{Graph::from_edges(n, edges), std::move(latent),
                       std::move(communities), std::move(tiers),
                       SplitAssignment(std::move(labels))};
}

ProbeReport informativeness_probe(const SynthInstance& inst, bool enforce_ordering) {
  const NodeId n = inst.graph.num_nodes();
  ProbeReport report;
  for (const auto& [name, m] : inst.tiers) {
    const Eigen::Index d = m.cols();
    std::size_t correct = 0;
    for (NodeId i = 0; i < n; ++i) {
      double best = 0;
      NodeId best_j = n;
      for (NodeId j = 0; j < n; ++j) {
        if (j == i) continue;
        double d2 = 0;
        for (Eigen::Index c = 0; c < d; ++c) {
          const double diff = static_cast<double>(m(i, c)) - m(j, c);
          d2 += diff * diff;
        }
        if (best_j == n || d2 < best) {
          best = d2;
          best_j = j;
        }
      }
      if (inst.communities[best_j] == inst.communities[i]) ++correct;
    }
    report.accuracy[name] = static_cast<double>(correct) / n;
  }
  auto acc = [&](const char* t) {
    auto it = report.accuracy.find(t);
    return it == report.accuracy.end() ? -1.0 : it->second;
  };
  report.ordering_ok = acc("clap_like") > acc("acoustic_like") &&
                       acc("acoustic_like") > acc("tags_like") &&
                       acc("tags_like") > acc("random");
  if (enforce_ordering && !report.ordering_ok)
    throw std::runtime_error(
        "generator misconfiguration: tier informativeness ordering violated "
        "(want clap_like > acoustic_like > tags_like > random)");
  return report;
}

void write_artifacts(const std::string& dir, const SynthInstance& inst,
                     const SynthConfig& cfg, const ProbeReport* probe) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());

  {
    std::ofstream f(dir + "/edges.tsv");
    if (!f) throw std::runtime_error("cannot write '" + dir + "/edges.tsv'");
    save_edge_list(f, inst.graph);
  }
  {
    // Identity map, persisted so feature rows stay aligned on reload.
    IdMap ids;
    for (NodeId v = 0; v < inst.graph.num_nodes(); ++v) ids.intern(std::to_string(v));
    save_id_map_file(dir + "/nodes.tsv", ids);
  }
  save_split_file(dir + "/split.tsv", inst.split);
  for (const auto& [name, m] : inst.tiers) save_ftrx_file(dir + "/" + name + ".ftrx", m);

  KvFile manifest = cfg.to_kv();
  manifest.set("nodes", std::to_string(inst.graph.num_nodes()));
  manifest.set("edges", std::to_string(inst.graph.num_edges()));
  manifest.set("train_count", std::to_string(inst.split.count(Split::Train)));
  manifest.set("val_count", std::to_string(inst.split.count(Split::Val)));
  manifest.set("test_count", std::to_string(inst.split.count(Split::Test)));
  for (const auto& [name, m] : inst.tiers)
    manifest.set("dim_" + name + "_actual", std::to_string(m.cols()));
  if (probe)
    for (const auto& [name, acc] : probe->accuracy)
      manifest.set("probe_" + name, fmt_num(acc));
  manifest.write_file(dir + "/manifest.txt");
}

DataSet load_dataset(const std::string& dir) {
  if (!fs::exists(dir + "/edges.tsv"))
    throw std::runtime_error("'" + dir + "' is not a data directory (no edges.tsv)");
  IdMap ids;
  const IdMap* fixed = nullptr;
  if (fs::exists(dir + "/nodes.tsv")) {
    ids = load_id_map_file(dir + "/nodes.tsv");
    fixed = &ids;
  }
  auto data = load_edge_list_file(dir + "/edges.tsv", fixed);
  SplitAssignment split = load_split_file(dir + "/split.tsv", data.ids);
  std::vector<std::string> tiers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".ftrx")
      tiers.push_back(entry.path().stem().string());
  }
  std::sort(tiers.begin(), tiers.end());
  return DataSet{std::move(data.graph), std::move(split), std::move(tiers), dir};
}

}  // namespace artsim
