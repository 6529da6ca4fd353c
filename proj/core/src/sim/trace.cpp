#include "edgerl/sim/trace.hpp"

#include <cmath>
#include <stdexcept>

namespace edgerl::sim {

void WorkloadTrace::validate() const {
  if (segments.empty())
    throw std::invalid_argument("trace " + name + ": no segments");
  for (const TraceSegment& s : segments) {
    if (s.duration_s <= 0.0)
      throw std::invalid_argument("trace " + name + ": segment duration <= 0");
    if (s.rate_hz < 0.0)
      throw std::invalid_argument("trace " + name + ": negative rate");
    if (s.burstiness < 0.0 || s.burstiness >= 1.0)
      throw std::invalid_argument("trace " + name + ": burstiness outside [0,1)");
  }
}

double WorkloadTrace::total_duration() const {
  double total = 0.0;
  for (const TraceSegment& s : segments) total += s.duration_s;
  return total;
}

const TraceSegment& WorkloadTrace::segment_at(double t) const {
  const double total = total_duration();
  double local = std::fmod(t, total);
  if (local < 0.0) local += total;
  for (const TraceSegment& s : segments) {
    if (local < s.duration_s) return s;
    local -= s.duration_s;
  }
  return segments.back();
}

int generate_arrivals(const WorkloadTrace& trace, double t, double dt, Rng& rng) {
  if (dt <= 0.0) throw std::invalid_argument("generate_arrivals: dt <= 0");
  const TraceSegment& seg = trace.segment_at(t);
  const double modulation = 1.0 + seg.burstiness * rng.uniform(-1.0, 1.0);
  return rng.poisson(seg.rate_hz * modulation * dt);
}

}  // namespace edgerl::sim
