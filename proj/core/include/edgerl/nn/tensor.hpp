#pragma once

#include <cstddef>
#include <vector>

#include "edgerl/rng.hpp"

namespace edgerl::nn {

using Vector = std::vector<double>;

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// One dense layer: y = W x + b. Dimensions are fixed at construction.
struct LayerParams {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim

  LayerParams() = default;
  LayerParams(std::size_t out_dim, std::size_t in_dim)
      : weights(out_dim, in_dim), bias(out_dim, 0.0) {}

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
  std::size_t param_count() const { return weights.data.size() + bias.size(); }

  // Uniform init in +/- sqrt(6 / (in + out)); biases start at zero.
  static LayerParams init(std::size_t out_dim, std::size_t in_dim, Rng& rng);

  bool same_shape(const LayerParams& other) const {
    return weights.rows == other.weights.rows && weights.cols == other.weights.cols;
  }
  bool finite() const;
};

// Gradient accumulators matching a LayerParams shape.
struct LayerGrads {
  Matrix weights;
  Vector bias;

  LayerGrads() = default;
  explicit LayerGrads(const LayerParams& p)
      : weights(p.out_dim(), p.in_dim()), bias(p.out_dim(), 0.0) {}

  void clear();
  bool finite() const;
};

}  // namespace edgerl::nn
