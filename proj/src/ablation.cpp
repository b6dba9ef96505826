#include "artsim/ablation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "artsim/rng.hpp"

namespace artsim {

namespace {

constexpr std::uint64_t kSeedTagInit = 1;
constexpr std::uint64_t kSeedTagSampling = 2;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void AblationGrid::validate() const {
  if (feature_sets.empty() || layer_counts.empty())
    throw std::invalid_argument("ablation grid axes must be non-empty");
  if (num_seeds < 1) throw std::invalid_argument("ablation needs at least one seed");
  for (auto l : layer_counts)
    if (l > 4) throw std::invalid_argument("layer counts must be in 0..4");
}

bool AblationResult::any_failed() const {
  for (const auto& r : rows)
    if (r.failed) return true;
  return false;
}

const AblationAggregate& AblationResult::cell(const std::string& features,
                                              std::uint32_t layers) const {
  for (const auto& a : aggregates)
    if (a.features == features && a.layers == layers) return a;
  throw std::out_of_range("no ablation cell (" + features + ", " +
                          std::to_string(layers) + " layers)");
}

FeatureSpec parse_feature_names(const std::string& names, const std::string& data_dir) {
  std::vector<FeatureSpec> parts;
  std::string cur;
  std::istringstream ss(names);
  while (std::getline(ss, cur, '+')) {
    if (cur.empty()) throw std::invalid_argument("empty tier name in '" + names + "'");
    parts.push_back(FeatureSpec::file(data_dir + "/" + cur + ".ftrx"));
  }
  if (parts.empty()) throw std::invalid_argument("empty feature spec");
  FeatureSpec inner =
      parts.size() == 1 ? std::move(parts.front()) : FeatureSpec::concat(std::move(parts));
  return FeatureSpec::standardized(std::move(inner));
}

AblationResult run_ablation(
    const Graph& g, const SplitAssignment& split, const AblationGrid& grid,
    const std::function<FeatureMatrix(const std::string&)>& materialize_features,
    unsigned num_workers) {
  grid.validate();
  const auto t0 = std::chrono::steady_clock::now();

  // Materialize each feature set once, up front; cells share them read-only.
  std::map<std::string, FeatureMatrix> features;
  for (const auto& fs : grid.feature_sets)
    if (!features.count(fs)) features.emplace(fs, materialize_features(fs));

  AblationResult result;
  for (const auto& fs : grid.feature_sets)
    for (auto layers : grid.layer_counts)
      for (std::uint32_t s = 0; s < grid.num_seeds; ++s) {
        AblationRow row;
        row.features = fs;
        row.layers = layers;
        row.seed = grid.base_seed + s;
        result.rows.push_back(std::move(row));
      }

  auto run_cell = [&](AblationRow& row) {
    const auto c0 = std::chrono::steady_clock::now();
    try {
      EncoderConfig enc = grid.encoder;
      enc.num_graph_layers = row.layers;
      enc.seed = derive_seed(row.seed, kSeedTagInit);
      TrainConfig tc = grid.train;
      tc.seed = derive_seed(row.seed, kSeedTagSampling);
      const FeatureMatrix& X = features.at(row.features);
      FitResult fitted = fit(g, split, X, enc, tc);
      EvalConfig ecfg{.k = tc.eval_k, .phase = Phase::Test};
      row.test_ndcg = evaluate(fitted.params, enc, g, split, X, ecfg).mean_ndcg;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
  };

  if (num_workers <= 1 || result.rows.size() <= 1) {
    for (auto& row : result.rows) run_cell(row);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= result.rows.size()) return;
        run_cell(result.rows[i]);
      }
    };
    std::vector<std::thread> threads;
    const unsigned n = std::min<unsigned>(num_workers, result.rows.size());
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Aggregate in grid order over the surviving seeds of each cell.
  for (const auto& fs : grid.feature_sets)
    for (auto layers : grid.layer_counts) {
      AblationAggregate agg;
      agg.features = fs;
      agg.layers = layers;
      double sum = 0.0;
      for (const auto& r : result.rows)
        if (r.features == fs && r.layers == layers && !r.failed) {
          sum += r.test_ndcg;
          ++agg.count;
        }
      if (agg.count == 0) continue;
      agg.mean = sum / agg.count;
      double ssd = 0.0;
      for (const auto& r : result.rows)
        if (r.features == fs && r.layers == layers && !r.failed)
          ssd += (r.test_ndcg - agg.mean) * (r.test_ndcg - agg.mean);
      agg.stddev = std::sqrt(ssd / agg.count);
      result.aggregates.push_back(std::move(agg));
    }

  result.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_ablation_csv(std::ostream& out, const AblationResult& result) {
  out << "kind,features,layers,seed,test_ndcg\n";
  for (const auto& r : result.rows) {
    if (r.failed) continue;
    out << "run," << r.features << ',' << r.layers << ',' << r.seed << ','
        << fmt17(r.test_ndcg) << '\n';
  }
  for (const auto& a : result.aggregates) {
    out << "mean," << a.features << ',' << a.layers << ",," << fmt17(a.mean) << '\n';
    out << "std," << a.features << ',' << a.layers << ",," << fmt17(a.stddev) << '\n';
  }
  if (!out) throw std::runtime_error("ablation CSV write failed");
}

AblationResult parse_ablation_csv(std::istream& in) {
  AblationResult result;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ablation CSV: empty file");
  if (line != "kind,features,layers,seed,test_ndcg" &&
      line != "kind,features,layers,seed,test_ndcg\r")
    throw std::runtime_error("ablation CSV: unexpected header '" + line + "'");
  std::size_t lineno = 1;
  std::map<std::pair<std::string, std::uint32_t>, std::size_t> agg_index;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) f.push_back(cur);
    while (f.size() < 5) f.emplace_back();
    if (f.size() != 5)
      throw std::runtime_error("ablation CSV line " + std::to_string(lineno) +
                               ": expected 5 fields");
    if (f[0] == "run") {
      AblationRow r;
      r.features = f[1];
      r.layers = static_cast<std::uint32_t>(std::stoul(f[2]));
      r.seed = std::stoull(f[3]);
      r.test_ndcg = std::stod(f[4]);
      result.rows.push_back(std::move(r));
    } else if (f[0] == "mean" || f[0] == "std") {
      const auto key = std::make_pair(f[1], static_cast<std::uint32_t>(std::stoul(f[2])));
      auto it = agg_index.find(key);
      if (it == agg_index.end()) {
        AblationAggregate a;
        a.features = key.first;
        a.layers = key.second;
        it = agg_index.emplace(key, result.aggregates.size()).first;
        result.aggregates.push_back(std::move(a));
      }
      auto& a = result.aggregates[it->second];
      if (f[0] == "mean") a.mean = std::stod(f[4]);
      else a.stddev = std::stod(f[4]);
    } else {
      throw std::runtime_error("ablation CSV line " + std::to_string(lineno) +
                               ": unknown kind '" + f[0] + "'");
    }
  }
  for (auto& a : result.aggregates)
    for (const auto& r : result.rows)
      if (r.features == a.features && r.layers == a.layers) ++a.count;
  return result;
}

}  // namespace artsim
