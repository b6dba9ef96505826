#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "artsim/mat.hpp"

namespace artsim {

template <class S>
using ParamMapT = std::map<std::string, MatT<S>>;

/// Named parameter tensors, sorted by name.
using ParamMap = ParamMapT<float>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias-corrected moments. Moment buffers are created lazily on
/// the first step and keyed by parameter name.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// One update over all parameters. Throws on a non-finite gradient,
  /// naming the offending parameter.
  void step(ParamMap& params, const ParamMap& grads);

  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  ParamMap m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace artsim
