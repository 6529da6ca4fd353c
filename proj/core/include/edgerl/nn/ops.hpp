#pragma once

#include <cstddef>

#include "edgerl/nn/tensor.hpp"
#include "edgerl/rng.hpp"

namespace edgerl::nn {

// y = W x + b. Throws std::invalid_argument on dimension mismatch.
Vector linear_forward(const LayerParams& layer, const Vector& input);

// Accumulates dL/dW and dL/db into grads given the cached forward input,
// and adds W^T dL/dy into d_input when non-null.
void linear_backward(const LayerParams& layer, const Vector& input,
                     const Vector& d_output, LayerGrads& grads,
                     Vector* d_input);

Vector relu(const Vector& x);
// Masks d in place with the ReLU derivative at pre-activation x.
void relu_backward(const Vector& x, Vector& d);

// Max-subtracted softmax. Throws std::invalid_argument on non-finite input.
Vector softmax(const Vector& logits);
// d_logits_i = p_i * (d_probs_i - sum_j d_probs_j p_j), appended into d_logits.
void softmax_backward(const Vector& probs, const Vector& d_probs,
                      Vector& d_logits);

// Draws index i with probability probs[i]. Throws on an empty vector.
std::size_t categorical_sample(const Vector& probs, Rng& rng);

// -ln(probs[chosen]) with the probability clamped at 1e-12.
// Throws std::out_of_range when chosen is out of range.
double neg_log_likelihood(const Vector& probs, std::size_t chosen);

double kl_divergence(const Vector& p, const Vector& q);

}  // namespace edgerl::nn
