#include "verisynth/scp.hpp"

#include <cmath>

namespace verisynth {

void ScpConfig::validate() const {
  if (!(delta0 > 0.0)) throw ScpError("scp: delta0 must be positive");
  if (!(gamma > 1.0)) throw ScpError("scp: gamma must exceed 1");
  if (!(omega > 0.0)) throw ScpError("scp: omega must be positive");
  if (!(tau > 0.0)) throw ScpError("scp: tau must be positive");
  if (!(eps_graph > 0.0 && eps_graph < 0.1))
    throw ScpError("scp: eps_graph must lie in (0, 0.1)");
  if (!(eps_pol > 0.0 && eps_pol < 0.1))
    throw ScpError("scp: eps_pol must lie in (0, 0.1)");
  if (max_iters < 1) throw ScpError("scp: max_iters must be at least 1");
}

AffineApprox linearize_bilinear(double d, double c, double yh, double zh) {
  AffineApprox a;
  a.coeff_y = 2.0 * d * zh;
  a.coeff_z = 2.0 * d * yh + c;
  a.constant = -2.0 * d * yh * zh;
  return a;
}

Bounds trust_region_bounds(double center, double delta, double floor,
                           double cap) {
  if (!(center > 0.0))
    throw ScpError("scp: trust-region center must be positive");
  if (!(delta > 0.0)) throw ScpError("scp: trust-region delta must be positive");
  const double dp = delta + 1.0;
  Bounds b{center / dp, center * dp};
  if (b.lo < floor) b.lo = floor;
  if (cap >= 0.0 && b.hi > cap) b.hi = cap;
  if (b.lo > b.hi) b.lo = b.hi;  // box collapsed onto the cap/floor
  return b;
}

std::map<std::string, Bounds> trust_region_constraints(
    const std::map<std::string, double>& center, double delta, double floor,
    double cap) {
  std::map<std::string, Bounds> out;
  for (const auto& [name, value] : center)
    out.emplace(name, trust_region_bounds(value, delta, floor, cap));
  return out;
}

ScpStep scp_step(double checked, double best, double delta, double gamma,
                 bool maximize) {
  ScpStep step;
  step.accept = maximize ? (checked > best) : (checked < best);
  step.delta = step.accept ? delta * gamma : delta / gamma;
  return step;
}

}  // namespace verisynth
