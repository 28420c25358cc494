#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace verisynth {

struct ScpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared knobs for every sequential-convex-programming loop.
struct ScpConfig {
  double delta0 = 1.0;       // initial trust-region size
  double gamma = 1.5;        // trust-region growth/shrink factor (> 1)
  double omega = 1e-4;       // stop once delta < omega
  double tau = 1e4;          // penalty weight (dominates unit-scale objectives)
  double eps_graph = 1e-6;   // graph-preserving floor on transition entries
  double eps_pol = 1e-6;     // strict-positivity floor on policy entries
  int max_iters = 200;

  void validate() const;
};

// Affine approximation  h_a(y, z) = constant + coeff_y * y + coeff_z * z.
struct AffineApprox {
  double constant = 0.0;
  double coeff_y = 0.0;
  double coeff_z = 0.0;
  double eval(double y, double z) const {
    return constant + coeff_y * y + coeff_z * z;
  }
};

// First-order expansion of the bilinear h(y, z) = (2d*y + c) * z at (yh, zh):
//   h_a(y, z) = 2d*(yh*zh + yh*(z - zh) + zh*(y - yh)) + c*z.
// Exact at the expansion point, and exact everywhere when d = 0.
AffineApprox linearize_bilinear(double d, double c, double yh, double zh);

// Multiplicative trust-region box  center/delta' <= v <= center*delta'  with
// delta' = delta + 1, intersected with [floor, cap] (pass cap < 0 for "no
// cap"; probability variables use floor = eps, cap = 1 - eps).
struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};
Bounds trust_region_bounds(double center, double delta, double floor,
                           double cap);
std::map<std::string, Bounds> trust_region_constraints(
    const std::map<std::string, double>& center, double delta,
    double floor = 0.0, double cap = -1.0);

// Accept/reject rule for one SCP iteration: accept iff the freshly checked
// objective strictly improves the incumbent (greater for maximization,
// smaller for minimization); ties reject. The trust region grows by gamma on
// accept and shrinks by gamma on reject.
struct ScpStep {
  bool accept = false;
  double delta = 0.0;
};
ScpStep scp_step(double checked, double best, double delta, double gamma,
                 bool maximize = true);

}  // namespace verisynth
