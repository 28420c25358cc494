#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "verisynth/model.hpp"

namespace verisynth {

struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Result of one model-checking query. `values` is indexed by state — or by
// state-node pair (index s*k + n) for FSC evaluation. `satisfied` is
// meaningful only when the query carried a specification threshold.
struct CheckResult {
  std::vector<double> values;
  double initial_value = 0.0;
  bool satisfied = true;
  std::string method;  // "vi" | "lp-primal" | "lp-dual" | "robust-vi"
  int iterations = 0;
  double wall_time_ms = 0.0;

  std::string to_json() const;
};

// Graph-only preprocessing: no_reach[s] == 1 iff no scheduler (and no
// graph-preserving instantiation) can reach the target set from s. Errors on
// an empty target set.
struct Prob0Result {
  std::vector<char> no_reach;
  std::vector<char> target;
};
Prob0Result prob0_and_reach_sets(const Model& m, const std::vector<char>& target);

// How nature resolves interval uncertainty in a row.
enum class NatureSense { minimize, maximize };

// Optimum of sum_s' P(s') * values(s') over the row polytope
// { P : lo <= P <= hi, sum P = 1 }, computed greedily by saturating bounds in
// value order. Point entries are degenerate intervals; all-point rows reduce
// to the plain dot product (bitwise, in row order).
double worst_case_expectation(const std::vector<Transition>& entries,
                              const std::vector<double>& values,
                              NatureSense sense);

enum class ReachMethod { vi, lp_primal };

// Maximal reachability probability of a point-probability MDP/MC, by value
// iteration or by the primal LP (minimize the value sum subject to
// super-solution rows); the two agree within 1e-6. Interval entries are
// rejected — route those through robust_value.
CheckResult max_reach_mdp(const Model& m, const std::vector<char>& target,
                          ReachMethod method = ReachMethod::vi);

// Optimal expected accumulated cost until reaching the goal set, with the
// cost pinned to zero on goal states. Requires the model to be free of
// dead-ends: every state must reach the goal almost surely under every
// scheduler (checked; violation is an input error, not a silent infinity).
CheckResult expected_cost_mdp(const Model& m, const std::vector<char>& goal,
                              Spec::Optimize optimize,
                              ReachMethod method = ReachMethod::vi);

// Occupancy-measure LP: maximizes the probability mass reaching the target
// subject to flow conservation and the threshold  sum_T x(s) >= beta, then
// extracts the randomized memoryless policy sigma(s, a) = x(s, a) / sum x.
// Zero-probability states are dropped from the program (variables and rows);
// they and the target states receive the uniform row, which no run starting
// from the initial distribution ever consults. Errors when the maximal
// reachability probability is below beta.
struct DualSynthesis {
  Policy policy;  // state-based, randomized
  std::vector<std::vector<double>> occupancy;  // [s][choice index]
  double objective = 0.0;
};
DualSynthesis dual_lp_synthesize(const Model& m,
                                 const std::vector<char>& target, double beta);

// Fixed point of the robust Bellman operator: nature resolves every interval
// row against the specification direction (minimizing the value for ">="
// specs, maximizing it for "<=" specs), while actions follow the given policy
// or, absent one, the specification's optimize direction. On point models
// this runs the exact nominal iteration.
CheckResult robust_value(const Model& m, const Spec& spec,
                         const Policy* policy = nullptr);

// Evaluates a finite-state controller on a (u)POMDP: a structured value
// iteration over state-node pairs (values index s*k + n) that keeps the
// per-action rectangular uncertainty instead of merging interval rows.
CheckResult evaluate_fsc(const Model& m, const Fsc& fsc, const Spec& spec);

// State-node pairs reachable from (initial state, initial node) under the
// FSC's support; mask indexed by s*k + n.
std::vector<char> fsc_reachable(const Model& m, const Fsc& fsc);

// Front door used by the CLI: resolves the target tokens, dispatches to the
// nominal or robust engine, and fills the satisfied flag.
CheckResult check(const Model& m, const Spec& spec);

}  // namespace verisynth
