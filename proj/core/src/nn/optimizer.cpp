#include "edgerl/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace edgerl::nn {

bool OptimizerState::step(const std::vector<LayerParams*>& params,
                          const std::vector<LayerGrads*>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("optimizer step: layer count mismatch");

  bool all_finite = true;
  for (const LayerGrads* g : grads)
    if (!g->finite()) all_finite = false;
  if (!all_finite) {
    for (LayerGrads* g : grads) g->clear();
    return false;
  }

  if (cfg_.rule == UpdateRule::kPlainGradient) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      LayerParams& p = *params[i];
      const LayerGrads& g = *grads[i];
      for (std::size_t j = 0; j < p.weights.data.size(); ++j)
        p.weights.data[j] -= cfg_.learning_rate * g.weights.data[j];
      for (std::size_t j = 0; j < p.bias.size(); ++j)
        p.bias[j] -= cfg_.learning_rate * g.bias[j];
    }
    ++step_count_;
    for (LayerGrads* g : grads) g->clear();
    return true;
  }

  if (m_.size() != params.size()) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::size_t n = params[i]->param_count();
      m_[i].assign(n, 0.0);
      v_[i].assign(n, 0.0);
    }
  }

  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    LayerParams& p = *params[i];
    const LayerGrads& g = *grads[i];
    std::vector<double>& m = m_[i];
    std::vector<double>& v = v_[i];
    if (m.size() != p.param_count())
      throw std::invalid_argument("optimizer step: layer shape changed");

    auto update_one = [&](double& w, double grad, std::size_t k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * grad;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * grad * grad;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      w -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    };

    std::size_t k = 0;
    for (std::size_t j = 0; j < p.weights.data.size(); ++j, ++k)
      update_one(p.weights.data[j], g.weights.data[j], k);
    for (std::size_t j = 0; j < p.bias.size(); ++j, ++k)
      update_one(p.bias[j], g.bias[j], k);
  }

  for (LayerGrads* g : grads) g->clear();
  return true;
}

void OptimizerState::reset() {
  step_count_ = 0;
  m_.clear();
  v_.clear();
}

}  // namespace edgerl::nn
