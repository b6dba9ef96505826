#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "artsim/features.hpp"
#include "artsim/graph.hpp"
#include "artsim/kv.hpp"
#include "artsim/mat.hpp"

namespace artsim {

/// Synthetic artist-graph benchmark: nodes carry a latent position (community
/// centroid + noise), edges are mutual kNN in latent space plus uniform noise
/// edges, and feature tiers expose the latent signal at controlled fidelity.
struct SynthConfig {
  std::uint32_t num_nodes = 2000;
  std::uint32_t num_communities = 20;
  std::uint32_t latent_dim = 16;
  std::uint32_t knn_edges = 8;
  double noise_edge_fraction = 0.1;
  double latent_noise = 0.04;  // within-community spread

  // Tier fidelity. clap_like adds latent-space noise before a fixed random
  // lift; acoustic_like adds noise after a fixed random projection;
  // tags_like flips one-hot community bits.
  double sigma_clap = 0.1;
  double sigma_acoustic = 0.5;
  double tag_flip_prob = 0.2;
  std::uint32_t dim_clap = 32;
  std::uint32_t dim_acoustic = 24;
  std::uint32_t dim_random = 64;

  double frac_train = 0.8;
  double frac_val = 0.1;
  double frac_test = 0.1;

  std::uint64_t seed = 42;

  // Test hook: use the identity instead of the random lift (needs
  // dim_clap == latent_dim).
  bool clap_identity_lift = false;

  void validate() const;
  KvFile to_kv() const;
  static SynthConfig from_kv(const KvFile& kv);
};

struct SynthInstance {
  Graph graph;
  MatF latent;
  std::vector<std::uint32_t> communities;
  std::map<std::string, FeatureMatrix> tiers;  // clap_like, acoustic_like, tags_like, random
  SplitAssignment split;
};

/// Pure function of the config; all randomness comes from the seeded
/// portable generator in a fixed draw order.
SynthInstance generate(const SynthConfig& cfg);

/// 1-nearest-neighbor community classification accuracy per tier. With
/// enforce_ordering, requires clap_like > acoustic_like > tags_like > random
/// and throws otherwise (generator misconfiguration).
struct ProbeReport {
  std::map<std::string, double> accuracy;
  bool ordering_ok = false;
};
ProbeReport informativeness_probe(const SynthInstance& inst, bool enforce_ordering = true);

/// Writes edges.tsv, split.tsv, one FTRX file per tier and manifest.txt
/// (config echo plus derived stats; no timestamps, so reruns are
/// byte-identical).
void write_artifacts(const std::string& dir, const SynthInstance& inst,
                     const SynthConfig& cfg, const ProbeReport* probe = nullptr);

/// Artifact set produced by write_artifacts / consumed by train and eval.
struct DataSet {
  Graph graph;
  SplitAssignment split;
  std::vector<std::string> tier_names;  // FTRX basenames found in the directory
  std::string dir;
};
DataSet load_dataset(const std::string& dir);

}  // namespace artsim
