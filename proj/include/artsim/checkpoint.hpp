#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "artsim/adam.hpp"

namespace artsim {

// Parameter checkpoint: magic "PRMS", u32 tensor count, then per tensor
// (sorted by name): u32 name length, name bytes, u32 rows, u32 cols,
// little-endian f32 payload.
void save_params(std::ostream& out, const ParamMap& params);
ParamMap load_params(std::istream& in);
void save_params_file(const std::string& path, const ParamMap& params);
ParamMap load_params_file(const std::string& path);

}  // namespace artsim
