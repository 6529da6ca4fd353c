#include "edgerl/rl/diversity.hpp"

#include <cmath>
#include <stdexcept>

#include "edgerl/nn/ops.hpp"

namespace edgerl::rl {

namespace {

constexpr std::size_t kDim = State::kDim;
constexpr double kRidge = 1e-6;

// Solves A x = b for symmetric positive-definite A (kDim x kDim, row-major)
// via Cholesky. Returns false if a pivot collapses.
bool spd_solve(std::vector<double> a, std::vector<double> b,
               std::vector<double>& x) {
  std::vector<double> l(kDim * kDim, 0.0);
  for (std::size_t i = 0; i < kDim; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * kDim + j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i * kDim + k] * l[j * kDim + k];
      if (i == j) {
        if (sum <= 0.0) return false;
        l[i * kDim + i] = std::sqrt(sum);
      } else {
        l[i * kDim + j] = sum / l[j * kDim + j];
      }
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < kDim; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * kDim + k] * b[k];
    b[i] /= l[i * kDim + i];
  }
  x.assign(kDim, 0.0);
  for (std::size_t i = kDim; i-- > 0;) {
    double sum = b[i];
    for (std::size_t k = i + 1; k < kDim; ++k) sum -= l[k * kDim + i] * x[k];
    x[i] = sum / l[i * kDim + i];
  }
  return true;
}

}  // namespace

DiversityBuffer::DiversityBuffer(int capacity)
    : capacity_(capacity),
      state_sum_(kDim, 0.0),
      state_outer_sum_(kDim * kDim, 0.0) {
  if (capacity < 1) throw std::invalid_argument("DiversityBuffer: capacity < 1");
}

void DiversityBuffer::add_to_sums(const Experience& e) {
  const auto x = e.state.as_array();
  for (std::size_t i = 0; i < kDim; ++i) {
    state_sum_[i] += x[i];
    for (std::size_t j = 0; j < kDim; ++j)
      state_outer_sum_[i * kDim + j] += x[i] * x[j];
  }
  if (prob_sums_.empty()) {
    prob_sums_.resize(e.probs.size());
    for (std::size_t h = 0; h < e.probs.size(); ++h)
      prob_sums_[h].assign(e.probs[h].size(), 0.0);
  }
  for (std::size_t h = 0; h < e.probs.size(); ++h)
    for (std::size_t i = 0; i < e.probs[h].size(); ++i)
      prob_sums_[h][i] += e.probs[h][i];
}

void DiversityBuffer::remove_from_sums(const Experience& e) {
  const auto x = e.state.as_array();
  for (std::size_t i = 0; i < kDim; ++i) {
    state_sum_[i] -= x[i];
    for (std::size_t j = 0; j < kDim; ++j)
      state_outer_sum_[i * kDim + j] -= x[i] * x[j];
  }
  for (std::size_t h = 0; h < e.probs.size(); ++h)
    for (std::size_t i = 0; i < e.probs[h].size(); ++i)
      prob_sums_[h][i] -= e.probs[h][i];
}

double DiversityBuffer::score(const State& s,
                              const std::vector<nn::Vector>& probs,
                              double alpha, double beta) const {
  const std::size_t n = entries_.size();
  if (n == 0) return 0.0;

  const auto x = s.as_array();
  std::vector<double> diff(kDim);
  for (std::size_t i = 0; i < kDim; ++i)
    diff[i] = x[i] - state_sum_[i] / static_cast<double>(n);

  double state_distance;
  if (n < kDim + 1) {
    double sq = 0.0;
    for (double d : diff) sq += d * d;
    state_distance = std::sqrt(sq);
  } else {
    // Population covariance plus a small ridge keeps the solve definite.
    std::vector<double> cov(kDim * kDim);
    for (std::size_t i = 0; i < kDim; ++i) {
      const double mi = state_sum_[i] / static_cast<double>(n);
      for (std::size_t j = 0; j < kDim; ++j) {
        const double mj = state_sum_[j] / static_cast<double>(n);
        cov[i * kDim + j] =
            state_outer_sum_[i * kDim + j] / static_cast<double>(n) - mi * mj;
      }
      cov[i * kDim + i] += kRidge;
    }
    std::vector<double> z;
    if (spd_solve(cov, diff, z)) {
      double quad = 0.0;
      for (std::size_t i = 0; i < kDim; ++i) quad += diff[i] * z[i];
      state_distance = std::sqrt(std::max(quad, 0.0));
    } else {
      double sq = 0.0;
      for (double d : diff) sq += d * d;
      state_distance = std::sqrt(sq);
    }
  }

  double kl = 0.0;
  if (!prob_sums_.empty() && probs.size() == prob_sums_.size()) {
    for (std::size_t h = 0; h < probs.size(); ++h) {
      nn::Vector mean(prob_sums_[h].size());
      for (std::size_t i = 0; i < mean.size(); ++i)
        mean[i] = prob_sums_[h][i] / static_cast<double>(n);
      kl += nn::kl_divergence(probs[h], mean);
    }
    kl /= static_cast<double>(probs.size());
  }

  return alpha * state_distance + beta * kl;
}

void DiversityBuffer::insert(Experience exp) {
  if (static_cast<int>(entries_.size()) < capacity_) {
    add_to_sums(exp);
    entries_.push_back(std::move(exp));
    seq_.push_back(next_seq_++);
    return;
  }
  // Full: locate the minimum-diversity entry, oldest first among ties.
  std::size_t victim = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].diversity < entries_[victim].diversity ||
        (entries_[i].diversity == entries_[victim].diversity &&
         seq_[i] < seq_[victim]))
      victim = i;
  }
  if (exp.diversity <= entries_[victim].diversity) return;
  remove_from_sums(entries_[victim]);
  add_to_sums(exp);
  entries_[victim] = std::move(exp);
  seq_[victim] = next_seq_++;
}

double DiversityBuffer::min_diversity() const {
  if (entries_.empty()) return 0.0;
  double m = entries_.front().diversity;
  for (const Experience& e : entries_) m = std::min(m, e.diversity);
  return m;
}

double DiversityBuffer::mean_diversity() const {
  if (entries_.empty()) return 0.0;
  double sum = 0.0;
  for (const Experience& e : entries_) sum += e.diversity;
  return sum / static_cast<double>(entries_.size());
}

const std::vector<Experience>& DiversityBuffer::entries() const {
  return entries_;
}

bool DiversityBuffer::accumulator_consistent(double tol) const {
  std::vector<double> sum(kDim, 0.0), outer(kDim * kDim, 0.0);
  for (const Experience& e : entries_) {
    const auto x = e.state.as_array();
    for (std::size_t i = 0; i < kDim; ++i) {
      sum[i] += x[i];
      for (std::size_t j = 0; j < kDim; ++j) outer[i * kDim + j] += x[i] * x[j];
    }
  }
  for (std::size_t i = 0; i < kDim; ++i)
    if (std::abs(sum[i] - state_sum_[i]) > tol) return false;
  for (std::size_t i = 0; i < kDim * kDim; ++i)
    if (std::abs(outer[i] - state_outer_sum_[i]) > tol) return false;
  return true;
}

}  // namespace edgerl::rl
