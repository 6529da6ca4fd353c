#include "edgerl/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgerl::nn {

namespace {
constexpr double kProbFloor = 1e-12;
}

LayerParams LayerParams::init(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
  LayerParams p(out_dim, in_dim);
  const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (double& w : p.weights.data) w = rng.uniform(-bound, bound);
  return p;
}

bool LayerParams::finite() const {
  for (double w : weights.data)
    if (!std::isfinite(w)) return false;
  for (double b : bias)
    if (!std::isfinite(b)) return false;
  return true;
}

void LayerGrads::clear() {
  std::fill(weights.data.begin(), weights.data.end(), 0.0);
  std::fill(bias.begin(), bias.end(), 0.0);
}

bool LayerGrads::finite() const {
  for (double w : weights.data)
    if (!std::isfinite(w)) return false;
  for (double b : bias)
    if (!std::isfinite(b)) return false;
  return true;
}

Vector linear_forward(const LayerParams& layer, const Vector& input) {
  if (input.size() != layer.in_dim())
    throw std::invalid_argument("linear_forward: input length " +
                                std::to_string(input.size()) + " != in_dim " +
                                std::to_string(layer.in_dim()));
  Vector out(layer.out_dim());
  for (std::size_t r = 0; r < layer.out_dim(); ++r) {
    double acc = layer.bias[r];
    const double* w = &layer.weights.data[r * layer.in_dim()];
    for (std::size_t c = 0; c < layer.in_dim(); ++c) acc += w[c] * input[c];
    out[r] = acc;
  }
  return out;
}

void linear_backward(const LayerParams& layer, const Vector& input,
                     const Vector& d_output, LayerGrads& grads,
                     Vector* d_input) {
  if (input.size() != layer.in_dim() || d_output.size() != layer.out_dim())
    throw std::invalid_argument("linear_backward: shape mismatch");
  for (std::size_t r = 0; r < layer.out_dim(); ++r) {
    const double g = d_output[r];
    grads.bias[r] += g;
    double* wg = &grads.weights.data[r * layer.in_dim()];
    for (std::size_t c = 0; c < layer.in_dim(); ++c) wg[c] += g * input[c];
  }
  if (d_input) {
    if (d_input->size() != layer.in_dim())
      throw std::invalid_argument("linear_backward: d_input shape mismatch");
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      const double g = d_output[r];
      const double* w = &layer.weights.data[r * layer.in_dim()];
      for (std::size_t c = 0; c < layer.in_dim(); ++c) (*d_input)[c] += g * w[c];
    }
  }
}

Vector relu(const Vector& x) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

void relu_backward(const Vector& x, Vector& d) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] <= 0.0) d[i] = 0.0;
}

Vector softmax(const Vector& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double max_logit = logits[0];
  for (double v : logits) {
    if (std::isnan(v)) throw std::invalid_argument("softmax: NaN logit");
    max_logit = std::max(max_logit, v);
  }
  Vector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void softmax_backward(const Vector& probs, const Vector& d_probs,
                      Vector& d_logits) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += d_probs[i] * probs[i];
  d_logits.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    d_logits[i] = probs[i] * (d_probs[i] - dot);
}

std::size_t categorical_sample(const Vector& probs, Rng& rng) {
  if (probs.empty())
    throw std::invalid_argument("categorical_sample: empty distribution");
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool any_positive = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
      any_positive = true;
    }
    cum += probs[i];
    if (u < cum) return i;
  }
  // Floating-point residue: fall back to the last index with mass.
  return any_positive ? last_positive : probs.size() - 1;
}

double neg_log_likelihood(const Vector& probs, std::size_t chosen) {
  if (chosen >= probs.size())
    throw std::out_of_range("neg_log_likelihood: index " +
                            std::to_string(chosen) + " out of range");
  return -std::log(std::max(probs[chosen], kProbFloor));
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
  }
  return kl;
}

}  // namespace edgerl::nn
