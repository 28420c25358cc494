#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "verisynth/model.hpp"

namespace verisynth {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Confidence that the true violation probability exceeds the tolerance nu
// after observing L violations among K independent samples:
//   alpha_nu = min(1, (L+1) * sum_{i=0}^{L+1} C(K,i) (1-nu)^(K-i) nu^i),
// evaluated in log space. Monotone decreasing in nu, increasing in L.
double confidence_bound(int K, int L, double nu);

// Smallest tolerance meeting a target confidence: returns [nu_lo, nu_hi] of
// width <= 1e-6 with  alpha(nu_hi) <= alpha_target < alpha(nu_lo).
std::pair<double, double> bisect_nu(int K, int L, double alpha_target);

// Per-parameter sampler override; must return a value in [lo, hi].
using ParamSampler =
    std::function<double(std::mt19937_64&, int param, double lo, double hi)>;

struct ScenarioConfig {
  int K = 1000;                  // sample count, >= 2
  std::optional<double> nu;      // tolerance in [0, 1): report alpha at nu
  std::optional<double> alpha;   // confidence target in (0, 1]: report nu*
  std::uint64_t seed = 0;
  int max_retries = 1000;        // per-row / per-sample rejection budget
  ParamSampler param_sampler = {};  // uniform over the range by default

  void validate() const;
};

struct ScenarioReport {
  int K = 0;
  int sat_count = 0;
  int viol_count = 0;
  std::optional<double> nu;        // echo of the requested tolerance
  std::optional<double> alpha;     // confidence at that tolerance
  std::optional<double> nu_star;   // bisected tolerance for the alpha target
  std::vector<std::pair<double, double>> alpha_table;  // (nu, alpha) grid

  std::string to_json() const;
};

// Draws one instantiation of every interval row / parameter. Deterministic
// in (model, seed, index); used by scenario_verify with index = sample id so
// parallel and sequential runs see identical samples.
Model sample_instantiation(const Model& m, std::uint64_t seed,
                           std::uint64_t index, int max_retries,
                           const ParamSampler& sampler = {});

// Samples K instantiations, checks the spec on each (point-model value
// iteration), counts violations, and attaches discarded-constraint
// confidence bounds. Honors the VERISYNTH_THREADS environment variable;
// results are independent of the thread count.
ScenarioReport scenario_verify(const Model& m, const Spec& spec,
                               const ScenarioConfig& cfg);

}  // namespace verisynth
