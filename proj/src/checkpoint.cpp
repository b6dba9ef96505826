#include "artsim/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "artsim/io.hpp"

namespace artsim {

void save_params(std::ostream& out, const ParamMap& params) {
  io::write_magic(out, "PRMS");
  io::write_u32_le(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    io::write_u32_le(out, static_cast<std::uint32_t>(name.size()));
    io::write_bytes(out, name.data(), name.size());
    io::write_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    io::write_u32_le(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) io::write_f32_le(out, m(i, j));
  }
}

ParamMap load_params(std::istream& in) {
  io::expect_magic(in, "PRMS", "PRMS");
  const std::uint32_t count = io::read_u32_le(in, "PRMS tensor count");
  ParamMap params;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t len = io::read_u32_le(in, "PRMS name length");
    std::string name(len, '\0');
    io::read_bytes(in, name.data(), len, "PRMS name");
    const std::uint32_t rows = io::read_u32_le(in, "PRMS rows");
    const std::uint32_t cols = io::read_u32_le(in, "PRMS cols");
    MatF m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = io::read_f32_le(in, "PRMS payload");
    if (!params.emplace(std::move(name), std::move(m)).second)
      throw std::runtime_error("PRMS: duplicate tensor name");
  }
  return params;
}

void save_params_file(const std::string& path, const ParamMap& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_params(f, params);
}

ParamMap load_params_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return load_params(f);
}

}  // namespace artsim
