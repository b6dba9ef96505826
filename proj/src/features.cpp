#include "artsim/features.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "artsim/io.hpp"
#include "artsim/rng.hpp"

namespace artsim {

FeatureSpec FeatureSpec::random(std::uint32_t dim, std::uint64_t seed) {
  return {Random{dim, seed}, {}};
}

FeatureSpec FeatureSpec::file(std::string path) {
  return {File{std::move(path)}, {}};
}

FeatureSpec FeatureSpec::concat(std::vector<FeatureSpec> parts) {
  if (parts.empty()) throw std::invalid_argument("Concat spec needs at least one child");
  FeatureSpec s{Concat{}, std::move(parts)};
  return s;
}

FeatureSpec FeatureSpec::standardized(FeatureSpec inner) {
  FeatureSpec s{Standardized{}, {}};
  s.parts.push_back(std::move(inner));
  return s;
}

namespace {

void check_finite(const FeatureMatrix& m, const std::string& what) {
  if (!m.allFinite())
    throw std::runtime_error(what + ": non-finite feature value");
}

void check_rows(const FeatureMatrix& m, NodeId num_nodes, const std::string& what) {
  if (static_cast<NodeId>(m.rows()) != num_nodes)
    throw std::runtime_error(what + ": has " + std::to_string(m.rows()) +
                             " rows, expected " + std::to_string(num_nodes));
}

}  // namespace

FeatureMatrix standardize(const FeatureMatrix& m, const SplitAssignment& split) {
  const auto& train = split.nodes(Split::Train);
  const Eigen::Index cols = m.cols();
  std::vector<double> mean(cols, 0.0), var(cols, 0.0);
  for (NodeId v : train)
    for (Eigen::Index c = 0; c < cols; ++c) mean[c] += m(v, c);
  for (auto& x : mean) x /= static_cast<double>(train.size());
  for (NodeId v : train)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double d = m(v, c) - mean[c];
      var[c] += d * d;
    }
  FeatureMatrix out(m.rows(), cols);
  constexpr double kEps = 1e-8;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(train.size()));
    const double denom = std::max(sd, kEps);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      out(r, c) = static_cast<float>((m(r, c) - mean[c]) / denom);
  }
  return out;
}

FeatureMatrix materialize(const FeatureSpec& spec, NodeId num_nodes,
                          const SplitAssignment& split) {
  if (split.num_nodes() != num_nodes)
    throw std::invalid_argument("split/num_nodes mismatch in materialize");
  struct Visitor {
    NodeId n;
    const SplitAssignment& split;
    const FeatureSpec& spec;

    FeatureMatrix operator()(const FeatureSpec::Random& r) const {
      Rng rng(r.seed);
      FeatureMatrix m(n, r.dim);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          m(i, j) = static_cast<float>(rng.uniform(-1.0, 1.0));
      return m;
    }
    FeatureMatrix operator()(const FeatureSpec::File& f) const {
      FeatureMatrix m = load_feature_file(f.path);
      check_rows(m, n, f.path);
      return m;
    }
    FeatureMatrix operator()(const FeatureSpec::Concat&) const {
      std::vector<FeatureMatrix> mats;
      Eigen::Index dim = 0;
      for (const auto& part : spec.parts) {
        mats.push_back(materialize(part, n, split));
        dim += mats.back().cols();
      }
      FeatureMatrix out(n, dim);
      Eigen::Index at = 0;
      for (const auto& m : mats) {
        out.middleCols(at, m.cols()) = m;
        at += m.cols();
      }
      return out;
    }
    FeatureMatrix operator()(const FeatureSpec::Standardized&) const {
      return standardize(materialize(spec.parts.front(), n, split), split);
    }
  };
  FeatureMatrix m = std::visit(Visitor{num_nodes, split, spec}, spec.kind);
  check_finite(m, "materialized features");
  return m;
}

void save_ftrx(std::ostream& out, const FeatureMatrix& m) {
  io::write_magic(out, "FTRX");
  io::write_u32_le(out, static_cast<std::uint32_t>(m.rows()));
  io::write_u32_le(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::write_f32_le(out, m(i, j));
}

FeatureMatrix load_ftrx(std::istream& in) {
  io::expect_magic(in, "FTRX", "FTRX");
  const std::uint32_t rows = io::read_u32_le(in, "FTRX rows");
  const std::uint32_t cols = io::read_u32_le(in, "FTRX cols");
  FeatureMatrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = io::read_f32_le(in, "FTRX payload");
  check_finite(m, "FTRX");
  return m;
}

void save_ftrx_file(const std::string& path, const FeatureMatrix& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_ftrx(f, m);
}

FeatureMatrix load_ftrx_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open feature file '" + path + "'");
  return load_ftrx(f);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

FeatureMatrix load_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("feature CSV: empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "id")
    throw std::runtime_error("feature CSV: header must be 'id,f0,...'");
  const std::size_t dim = header.size() - 1;

  std::vector<std::pair<std::uint32_t, std::vector<float>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != dim + 1)
      throw std::runtime_error("feature CSV line " + std::to_string(lineno) +
                               ": expected " + std::to_string(dim + 1) + " fields");
    std::vector<float> vals(dim);
    std::uint32_t id = 0;
    try {
      id = static_cast<std::uint32_t>(std::stoul(fields[0]));
      for (std::size_t j = 0; j < dim; ++j) vals[j] = std::stof(fields[j + 1]);
    } catch (const std::exception&) {
      throw std::runtime_error("feature CSV line " + std::to_string(lineno) +
                               ": malformed number");
    }
    rows.emplace_back(id, std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("feature CSV: no data rows");

  FeatureMatrix m(rows.size(), dim);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [id, vals] : rows) {
    if (id >= rows.size())
      throw std::runtime_error("feature CSV: row id " + std::to_string(id) +
                               " out of range for " + std::to_string(rows.size()) + " rows");
    if (seen[id])
      throw std::runtime_error("feature CSV: duplicate row id " + std::to_string(id));
    seen[id] = true;
    for (std::size_t j = 0; j < dim; ++j) m(id, j) = vals[j];
  }
  check_finite(m, "feature CSV");
  return m;
}

void save_feature_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "id";
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(m(i, j)));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("feature CSV write failed");
}

FeatureMatrix load_feature_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open feature file '" + path + "'");
  char magic[4] = {0, 0, 0, 0};
  f.read(magic, 4);
  f.clear();
  f.seekg(0);
  if (f.gcount() == 4 && std::memcmp(magic, "FTRX", 4) == 0) return load_ftrx(f);
  return load_feature_csv(f);
}

}  // namespace artsim
