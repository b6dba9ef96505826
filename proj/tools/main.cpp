#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "artsim/ablation.hpp"
#include "artsim/checkpoint.hpp"
#include "artsim/eval.hpp"
#include "artsim/model.hpp"
#include "artsim/svg_plot.hpp"
#include "artsim/synthgen.hpp"
#include "artsim/training.hpp"

namespace fs = std::filesystem;
using namespace artsim;

namespace {

// Stream tags: one PRNG stream for weight init, one for triplet sampling.
constexpr std::uint64_t kSeedTagInit = 1;
constexpr std::uint64_t kSeedTagSampling = 2;

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

unsigned worker_count(std::size_t cells) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("GRB_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  if (cells < n) n = static_cast<unsigned>(cells);
  return std::max(1u, n);
}

std::string sibling_cfg_path(const std::string& checkpoint) {
  fs::path p(checkpoint);
  p.replace_extension(".cfg");
  return p.string();
}

struct TrainFlags {
  std::uint32_t layers = 2;
  std::string layer_kind = "sage";
  std::string features = "clap_like";
  double margin = 0.5;
  double lr = 1e-3;
  std::uint32_t epochs = 15;
  std::uint32_t patience = 10;
  std::uint32_t k = 10;
  std::uint32_t hidden_dim = 256;
  std::uint32_t embed_dim = 128;
  std::uint32_t fc_layers = 2;
  std::uint32_t batch = 1024;

  void add_options(CLI::App* cmd, bool include_layers = true) {
    if (include_layers)
      cmd->add_option("--layers", layers, "Graph layers (0..4)")->check(CLI::Range(0, 4));
    cmd->add_option("--layer-kind", layer_kind, "Graph layer type")
        ->check(CLI::IsMember({"sage", "gin"}));
    cmd->add_option("--margin", margin, "Triplet loss margin");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--epochs", epochs, "Max training epochs");
    cmd->add_option("--patience", patience, "Early-stopping patience (epochs)");
    cmd->add_option("--k", k, "NDCG cutoff");
    cmd->add_option("--hidden-dim", hidden_dim, "Hidden width");
    cmd->add_option("--embed-dim", embed_dim, "Embedding width");
    cmd->add_option("--fc-layers", fc_layers, "Fully connected head depth");
    cmd->add_option("--batch", batch, "Triplets per batch");
  }

  EncoderConfig encoder(std::uint64_t seed) const {
    EncoderConfig enc;
    enc.num_graph_layers = layers;
    enc.layer_kind = parse_layer_kind(layer_kind);
    enc.hidden_dim = hidden_dim;
    enc.embed_dim = embed_dim;
    enc.fc_layers = fc_layers;
    enc.seed = seed;
    return enc;
  }

  TrainConfig train(std::uint64_t seed) const {
    TrainConfig tc;
    tc.margin = margin;
    tc.lr = lr;
    tc.triplets_per_batch = batch;
    tc.max_epochs = epochs;
    tc.patience = patience;
    tc.eval_k = k;
    tc.seed = seed;
    return tc;
  }
};

int cmd_gen(const std::string& data_dir, const SynthConfig& cfg) {
  cfg.validate();
  SynthInstance inst = generate(cfg);
  ProbeReport probe = informativeness_probe(inst, /*enforce_ordering=*/false);
  write_artifacts(data_dir, inst, cfg, &probe);
  std::cout << "wrote " << data_dir << ": " << inst.graph.num_nodes() << " nodes, "
            << inst.graph.num_edges() << " edges, split "
            << inst.split.count(Split::Train) << "/" << inst.split.count(Split::Val)
            << "/" << inst.split.count(Split::Test) << "\n";
  std::cout << "tier 1-NN community accuracy:";
  for (const auto& [name, acc] : probe.accuracy)
    std::cout << ' ' << name << '=' << acc;
  std::cout << "\n";
  if (!probe.ordering_ok)
    std::cerr << "warning: tier informativeness ordering (clap_like > acoustic_like > "
                 "tags_like > random) does not hold for this config\n";
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir,
              const TrainFlags& flags, std::uint64_t seed) {
  DataSet ds = load_dataset(data_dir);
  FeatureSpec spec = parse_feature_names(flags.features, data_dir);
  FeatureMatrix X = materialize(spec, ds.graph.num_nodes(), ds.split);
  std::cout << "features '" << flags.features << "' -> dim " << X.cols() << "\n";
  if (flags.layers == 0)
    std::cout << "layers=0: MLP-only baseline, graph topology unused\n";

  EncoderConfig enc = flags.encoder(derive_seed(seed, kSeedTagInit));
  TrainConfig tc = flags.train(derive_seed(seed, kSeedTagSampling));
  FitResult result = fit(ds.graph, ds.split, X, enc, tc);

  fs::create_directories(out_dir);
  const std::string prms = out_dir + "/model.prms";
  save_params_file(prms, result.params);
  ModelInfo info{enc, static_cast<std::uint32_t>(X.cols()), flags.features};
  info.to_kv().write_file(out_dir + "/model.cfg");
  {
    std::ofstream f(out_dir + "/history.csv");
    if (!f) throw std::runtime_error("cannot write history.csv");
    write_history_csv(f, result);
  }
  std::cout << "initial val NDCG@" << tc.eval_k << " = " << result.initial_val_ndcg
            << "\n";
  std::cout << "best val NDCG@" << tc.eval_k << " = " << result.best_val_ndcg
            << " at epoch " << result.best_epoch << " (" << result.history.size()
            << " epochs run)\n";
  std::cout << "checkpoint: " << prms << "\n";
  return 0;
}

int cmd_eval(const std::string& data_dir, const std::string& checkpoint,
             std::uint32_t k, bool k_given, const std::string& phase_name_arg,
             const std::string& pool_name, std::string out_path) {
  DataSet ds = load_dataset(data_dir);
  ParamMap params = load_params_file(checkpoint);
  ModelInfo info = ModelInfo::from_kv(KvFile::parse_file(sibling_cfg_path(checkpoint)));
  check_param_shapes(params, info.encoder, info.in_dim);

  FeatureSpec spec = parse_feature_names(info.features, data_dir);
  FeatureMatrix X = materialize(spec, ds.graph.num_nodes(), ds.split);
  if (X.cols() != static_cast<Eigen::Index>(info.in_dim))
    throw std::runtime_error("feature dim mismatch: checkpoint expects " +
                             std::to_string(info.in_dim) + ", data dir provides " +
                             std::to_string(X.cols()));

  EvalConfig ecfg;
  ecfg.k = k_given ? k : 10;
  ecfg.phase = phase_name_arg == "val" ? Phase::Val : Phase::Test;
  ecfg.pool = pool_name == "all" ? CandidatePool::AllNodes : CandidatePool::SameSplit;
  const Split eval_split = ecfg.phase == Phase::Val ? Split::Val : Split::Test;
  const std::size_t candidates = (ecfg.pool == CandidatePool::AllNodes
                                      ? ds.graph.num_nodes()
                                      : ds.split.count(eval_split)) - 1;
  if (ecfg.k > candidates) {
    std::cerr << "warning: k=" << ecfg.k << " exceeds candidate count " << candidates
              << "; clamping\n";
    ecfg.k = static_cast<std::uint32_t>(candidates);
  }

  EvalReport report = evaluate(params, info.encoder, ds.graph, ds.split, X, ecfg);
  if (out_path.empty())
    out_path = data_dir + "/eval_" + phase_name(ecfg.phase) + ".csv";
  {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
    write_eval_csv(f, report);
  }
  std::printf("mean NDCG@%u (%s, %zu queries) = %.4f\n", report.k,
              phase_name(report.phase), report.num_queries, report.mean_ndcg);
  std::cout << "report: " << out_path << "\n";
  return 0;
}

int cmd_ablate(const std::string& data_dir, const std::string& features_list,
               const std::string& layers_list, std::uint32_t seeds,
               std::uint64_t base_seed, const TrainFlags& flags,
               const std::string& out_path, const std::string& svg_path) {
  DataSet ds = load_dataset(data_dir);
  AblationGrid grid;
  grid.feature_sets = split_list(features_list, ',');
  grid.layer_counts.clear();
  for (const auto& l : split_list(layers_list, ','))
    grid.layer_counts.push_back(static_cast<std::uint32_t>(std::stoul(l)));
  grid.num_seeds = seeds;
  grid.base_seed = base_seed;
  grid.encoder = flags.encoder(0);
  grid.train = flags.train(0);
  grid.validate();

  const std::size_t cells = grid.feature_sets.size() * grid.layer_counts.size() * seeds;
  const unsigned workers = worker_count(cells);
  std::cout << "ablation: " << grid.feature_sets.size() << " feature sets x "
            << grid.layer_counts.size() << " layer counts x " << seeds << " seeds = "
            << cells << " cells on " << workers << " workers\n";

  auto materializer = [&](const std::string& names) {
    return materialize(parse_feature_names(names, data_dir), ds.graph.num_nodes(),
                       ds.split);
  };
  AblationResult result = run_ablation(ds.graph, ds.split, grid, materializer, workers);

  const std::string out = out_path.empty() ? data_dir + "/ablate.csv" : out_path;
  {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    write_ablation_csv(f, result);
  }
  if (!svg_path.empty()) write_ablation_svg_file(svg_path, result);

  for (const auto& a : result.aggregates)
    std::printf("%-32s layers=%u  mean=%.4f  std=%.4f  (n=%u)\n", a.features.c_str(),
                a.layers, a.mean, a.stddev, a.count);
  std::printf("total wall time: %.1fs\n", result.total_seconds);
  std::cout << "results: " << out << "\n";

  if (result.any_failed()) {
    for (const auto& r : result.rows)
      if (r.failed)
        std::cerr << "cell failed: features=" << r.features << " layers=" << r.layers
                  << " seed=" << r.seed << ": " << r.error << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inductive artist-similarity embeddings: synthetic benchmark "
               "generation, GNN training with triplet loss, NDCG evaluation "
               "and the layers-vs-features ablation"};
  app.require_subcommand(1);

  std::string data_dir;
  std::uint64_t seed = 42;

  auto add_shared = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir, "Artifact directory")->required();
    cmd->add_option("--seed", seed, "Base seed");
    cmd->set_config("--config", "", "key=value config file");
    cmd->allow_config_extras(CLI::config_extras_mode::error);
    return cmd;
  };

  // gen
  auto* gen = add_shared(app.add_subcommand("gen", "Generate a synthetic benchmark"));
  SynthConfig syn;
  gen->add_option("--num_nodes", syn.num_nodes);
  gen->add_option("--num_communities", syn.num_communities);
  gen->add_option("--latent_dim", syn.latent_dim);
  gen->add_option("--knn_edges", syn.knn_edges);
  gen->add_option("--noise_edge_fraction", syn.noise_edge_fraction);
  gen->add_option("--latent_noise", syn.latent_noise);
  gen->add_option("--sigma_clap", syn.sigma_clap);
  gen->add_option("--sigma_acoustic", syn.sigma_acoustic);
  gen->add_option("--tag_flip_prob", syn.tag_flip_prob);
  gen->add_option("--dim_clap", syn.dim_clap);
  gen->add_option("--dim_acoustic", syn.dim_acoustic);
  gen->add_option("--dim_random", syn.dim_random);
  gen->add_option("--frac_train", syn.frac_train);
  gen->add_option("--frac_val", syn.frac_val);
  gen->add_option("--frac_test", syn.frac_test);

  // train
  auto* train = add_shared(app.add_subcommand("train", "Train an encoder"));
  TrainFlags tf;
  tf.add_options(train);
  train->add_option("--features", tf.features,
                    "Feature tiers, e.g. clap_like or clap_like+tags_like");
  std::string out_dir;
  train->add_option("--out-dir", out_dir, "Output directory (default: data dir)");

  // eval
  auto* eval_cmd = add_shared(app.add_subcommand("eval", "Evaluate a checkpoint"));
  std::string checkpoint, phase_arg = "test", pool_arg = "split", eval_out;
  std::uint32_t eval_k = 10;
  eval_cmd->add_option("--checkpoint", checkpoint, "PRMS checkpoint path")->required();
  auto* k_opt = eval_cmd->add_option("--k", eval_k, "NDCG cutoff");
  eval_cmd->add_option("--phase", phase_arg, "Evaluation phase")
      ->check(CLI::IsMember({"val", "test"}));
  eval_cmd->add_option("--pool", pool_arg, "Candidate pool")
      ->check(CLI::IsMember({"split", "all"}));
  eval_cmd->add_option("--out", eval_out, "Report CSV path");

  // ablate
  auto* ablate = add_shared(app.add_subcommand("ablate", "Run the ablation grid"));
  TrainFlags af;
  af.add_options(ablate, /*include_layers=*/false);
  std::string grid_features = "clap_like,acoustic_like,tags_like,random";
  std::string grid_layers = "0,1,2,3,4";
  std::uint32_t grid_seeds = 3;
  std::string ablate_out, svg_out;
  ablate->add_option("--features", grid_features,
                     "Comma list of tier specs (each name[+name...])");
  ablate->add_option("--layers", grid_layers, "Comma list of layer counts");
  ablate->add_option("--seeds", grid_seeds, "Seeds per cell");
  ablate->add_option("--out", ablate_out, "Results CSV path");
  ablate->add_option("--svg", svg_out, "Optional SVG line chart path");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      syn.seed = seed;
      return cmd_gen(data_dir, syn);
    }
    if (train->parsed())
      return cmd_train(data_dir, out_dir.empty() ? data_dir : out_dir, tf, seed);
    if (eval_cmd->parsed())
      return cmd_eval(data_dir, checkpoint, eval_k, k_opt->count() > 0, phase_arg,
                      pool_arg, eval_out);
    if (ablate->parsed())
      return cmd_ablate(data_dir, grid_features, grid_layers, grid_seeds, seed, af,
                        ablate_out, svg_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
