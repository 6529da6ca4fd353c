#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgerl/rng.hpp"

namespace edgerl::sim {

struct TraceSegment {
  double duration_s = 0.0;
  double rate_hz = 0.0;      // mean arrival rate
  double burstiness = 0.0;   // in [0, 1): per-tick rate modulation amplitude
};

// Piecewise-stationary arrival process. The trace loops past its end, so
// regime shifts repeat with the segment schedule.
struct WorkloadTrace {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<TraceSegment> segments;

  void validate() const;  // durations > 0, rates >= 0, burstiness in [0, 1)
  double total_duration() const;
  const TraceSegment& segment_at(double t) const;
};

// Poisson arrivals for [t, t+dt) at the active segment's rate, modulated by
// its burstiness (uniform mean-preserving rate noise). Deterministic given
// the rng state.
int generate_arrivals(const WorkloadTrace& trace, double t, double dt, Rng& rng);

}  // namespace edgerl::sim
