#include "artsim/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace artsim {

void AdamState::step(ParamMap& params, const ParamMap& grads) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam: parameter/gradient key sets differ");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (auto& [name, theta] : params) {
    auto git = grads.find(name);
    if (git == grads.end())
      throw std::invalid_argument("adam: no gradient for parameter '" + name + "'");
    const MatF& g = git->second;
    if (g.rows() != theta.rows() || g.cols() != theta.cols())
      throw std::invalid_argument("adam: gradient shape mismatch for '" + name + "'");
    if (!g.allFinite())
      throw std::runtime_error("adam: non-finite gradient for parameter '" + name + "'");
    auto [mit, fresh_m] = m_.try_emplace(name, MatF::Zero(theta.rows(), theta.cols()));
    auto [vit, fresh_v] = v_.try_emplace(name, MatF::Zero(theta.rows(), theta.cols()));
    MatF& m = mit->second;
    MatF& v = vit->second;
    const float b1 = static_cast<float>(cfg_.beta1);
    const float b2 = static_cast<float>(cfg_.beta2);
    m = b1 * m + (1.0f - b1) * g;
    v = (b2 * v.array() + (1.0f - b2) * g.array().square()).matrix();
    const float lr = static_cast<float>(cfg_.lr);
    const float eps = static_cast<float>(cfg_.eps);
    const float ic1 = static_cast<float>(1.0 / c1);
    const float ic2 = static_cast<float>(1.0 / c2);
    theta.array() -= lr * (m.array() * ic1) / ((v.array() * ic2).sqrt() + eps);
  }
}

}  // namespace artsim
