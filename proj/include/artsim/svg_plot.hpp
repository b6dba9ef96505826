#pragma once

#include <ostream>
#include <string>

#include "artsim/ablation.hpp"

namespace artsim {

/// Self-contained SVG line chart of the ablation aggregates: one line per
/// feature set over layer counts, with +-stddev error bars.
void write_ablation_svg(std::ostream& out, const AblationResult& result,
                        const std::string& title = "test NDCG vs graph layers");
void write_ablation_svg_file(const std::string& path, const AblationResult& result,
                             const std::string& title = "test NDCG vs graph layers");

}  // namespace artsim
