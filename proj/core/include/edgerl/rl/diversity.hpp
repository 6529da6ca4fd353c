#pragma once

#include <cstdint>
#include <vector>

#include "edgerl/rl/types.hpp"

namespace edgerl::rl {

// Fixed-capacity experience store ranked by diversity. A new experience
// displaces the least diverse stored one only when it is more diverse, so
// the minimum stored diversity never decreases once the buffer is full.
// State mean and covariance are kept as running sums over the stored states.
class DiversityBuffer {
 public:
  explicit DiversityBuffer(int capacity);

  // Mahalanobis state novelty plus mean per-head KL against the buffer's
  // mean policy, weighted by alpha/beta. With fewer than kDim+1 stored
  // states the Mahalanobis term falls back to Euclidean distance from the
  // mean; an empty buffer scores 0.
  double score(const State& s, const std::vector<nn::Vector>& probs,
               double alpha, double beta) const;

  // Appends while below capacity; otherwise replaces the minimum-diversity
  // entry (ties: the oldest one) when exp.diversity exceeds it.
  void insert(Experience exp);

  std::size_t size() const { return entries_.size(); }
  int capacity() const { return capacity_; }
  bool full() const { return static_cast<int>(entries_.size()) >= capacity_; }
  double min_diversity() const;
  double mean_diversity() const;
  const std::vector<Experience>& entries() const;

  // Recomputes mean/covariance from the stored states and compares against
  // the running sums (test hook).
  bool accumulator_consistent(double tol = 1e-9) const;

 private:
  void add_to_sums(const Experience& e);
  void remove_from_sums(const Experience& e);

  int capacity_;
  std::uint64_t next_seq_ = 0;
  std::vector<Experience> entries_;
  std::vector<std::uint64_t> seq_;
  std::vector<double> state_sum_;             // kDim
  std::vector<double> state_outer_sum_;       // kDim x kDim, row-major
  std::vector<nn::Vector> prob_sums_;         // per head
};

}  // namespace edgerl::rl
