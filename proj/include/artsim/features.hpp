#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "artsim/graph.hpp"
#include "artsim/mat.hpp"

namespace artsim {

/// Per-node dense feature rows: row i belongs to NodeId i.
using FeatureMatrix = MatF;

/// Recursive feature descriptor: a leaf source, a column concatenation, or a
/// z-score wrapper (statistics from Train rows only).
struct FeatureSpec {
  struct Random {
    std::uint32_t dim;
    std::uint64_t seed;
  };
  struct File {
    std::string path;
  };
  struct Concat {};        // children in `parts`
  struct Standardized {};  // single child in `parts`

  std::variant<Random, File, Concat, Standardized> kind;
  std::vector<FeatureSpec> parts;

  static FeatureSpec random(std::uint32_t dim, std::uint64_t seed);
  static FeatureSpec file(std::string path);
  static FeatureSpec concat(std::vector<FeatureSpec> parts);
  static FeatureSpec standardized(FeatureSpec inner);
};

/// Evaluates a spec to a num_nodes x dim matrix. Random leaves draw i.i.d.
/// uniform[-1,1] from the seeded portable generator; Standardized applies a
/// per-column z-score using Train-node statistics (epsilon guard 1e-8).
FeatureMatrix materialize(const FeatureSpec& spec, NodeId num_nodes,
                          const SplitAssignment& split);

/// Reads FTRX (binary) or CSV ("id,f0,...") by sniffing the magic. CSV rows
/// may be permuted; they are reordered so row i is node i. All values must
/// be finite.
FeatureMatrix load_feature_file(const std::string& path);

FeatureMatrix load_ftrx(std::istream& in);
void save_ftrx(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix load_ftrx_file(const std::string& path);
void save_ftrx_file(const std::string& path, const FeatureMatrix& m);

FeatureMatrix load_feature_csv(std::istream& in);
void save_feature_csv(std::ostream& out, const FeatureMatrix& m);

/// Z-score per column with statistics from Train rows; constant columns
/// collapse to zero (denominator guard 1e-8).
FeatureMatrix standardize(const FeatureMatrix& m, const SplitAssignment& split);

}  // namespace artsim
