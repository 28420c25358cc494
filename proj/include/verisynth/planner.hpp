#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "verisynth/model.hpp"
#include "verisynth/model_io.hpp"

namespace verisynth {

struct PlannerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PlannerConfig {
  double gamma_d = 0.05;  // replan when the belief moved this many bits
  double gamma_r = 0.1;   // gather information when the risk exceeds this
  int risk_samples = 200;      // N labelings per risk assessment
  int depth = 2;               // perception-tree depth bound C_a
  double beta = 0.5;           // safety-vs-information weight in [0, 1]
  std::uint64_t seed = 0;
  int step_cap = 200;          // episode length bound
  // Algorithm variants (ensemble study rows): sensing + belief updates,
  // divergence-gated replanning (off = replan every step), and
  // risk-triggered active perception.
  bool use_perception = true;
  bool use_divergence_test = true;
  bool use_active_perception = true;

  void validate() const;
};

struct ProductState {
  int s = 0;  // model state
  int q = 0;  // automaton state
};

// One noisy label reading: proposition `prop` (belief index) observed at
// state `state` with outcome `value`.
struct Reading {
  int state = 0;
  int prop = 0;
  bool value = false;
};

// Draws one reading per (visible state, belief proposition) around the
// agent: true with rate true_positive where the proposition actually holds
// and false_positive where it does not.
std::vector<Reading> sense(const Model& m, const GroundTruth& truth,
                           const ObservationModel& om, int agent_state,
                           const std::vector<std::string>& props,
                           std::mt19937_64& rng);

// Per-reading Bayes rule on the independent Bernoulli belief. A reading that
// is impossible under a degenerate prior leaves the entry pinned (a warning
// is printed once per call).
BeliefLabeling bayes_update(const BeliefLabeling& belief,
                            const ObservationModel& om, int agent_state,
                            const std::vector<Reading>& readings);

// Cumulative Jensen-Shannon divergence (bits): sum over every
// (state, proposition) Bernoulli pair.
double jsd(const BeliefLabeling& prior, const BeliefLabeling& posterior);

// Most-probable deterministic labeling: proposition included iff its belief
// is >= 0.5.
GroundTruth map_labeling(const BeliefLabeling& belief);

// Model x DFA product under a fixed labeling. States are (s, q) packed as
// s * dfa.num_states + q; the automaton consumes the label of every entered
// state, starting with the initial state's label.
struct ProductInfo {
  Model model;
  int dfa_states = 0;
  std::vector<char> accepting;  // product-state mask S x F

  int product_state(int s, int q) const { return s * dfa_states + q; }
};
ProductInfo build_product(const Model& mdp, const Dfa& dfa,
                          const GroundTruth& labeling);

// Deterministic memoryless product policy maximizing the probability of
// reaching the accepting set, with per-state values. Ties between optimal
// actions resolve to the smallest action index.
struct TaskPolicy {
  Policy policy;  // state-based on product states
  double value = 0.0;
  std::vector<double> values;  // per product state
};
TaskPolicy synthesize_task_policy(const Model& mdp, const Dfa& dfa,
                                  const GroundTruth& labeling);

// Samples N labelings from the belief, solves each induced product chain
// exactly, and compares the empirical success mean against the MAP-labeling
// value of the given policy.
struct RiskReport {
  double map_value = 0.0;
  double empirical_mean = 0.0;
  double risk = 0.0;  // |map_value - empirical_mean|
  int N = 0;
  double hoeffding(double eps) const;  // 2 exp(-2 N eps^2)
};
RiskReport statistical_risk(const Model& mdp, const Dfa& dfa,
                            const Policy& policy,
                            const BeliefLabeling& belief, int N,
                            std::uint64_t seed);

// Bounded-depth search for an information-gathering action sequence: every
// node scores beta * safety + (1 - beta) * normalized-information, where
// safety = Pr(automaton state undisturbed) * Pr(return to the root state
// within the remaining depth budget) and information is the expected
// one-step entropy reduction over task-relevant propositions. Ties prefer
// shorter, then lexicographically smaller sequences; the empty sequence is
// always a candidate.
std::vector<int> active_perception_strategy(const Model& mdp, const Dfa& dfa,
                                            ProductState current,
                                            const BeliefLabeling& belief,
                                            const ObservationModel& om,
                                            const PlannerConfig& cfg);

struct TraceStep {
  int t = 0;
  int state = 0;
  int q_true = 0;
  int q_believed = 0;
  int readings = 0;
  double divergence = 0.0;
  bool replanned = false;
  std::optional<double> risk;
  bool perception = false;  // step taken inside a perception excursion
  int action = -1;
  std::uint64_t belief_hash = 0;  // FNV-1a over the belief vector bytes
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  std::string outcome;  // "success" | "failure" | "timeout"
  int num_steps = 0;
  int num_plans = 0;
  int num_perception = 0;

  bool success() const { return outcome == "success"; }
  std::string to_jsonl() const;  // one JSON record per step + summary record
};

// The full observe / update / replan / assess / act loop under the true
// dynamics and ground-truth labels. Deterministic for fixed inputs and seed.
EpisodeTrace run_episode(const Model& mdp, const Dfa& dfa,
                         const GroundTruth& truth, const ObservationModel& om,
                         const BeliefLabeling& prior,
                         const PlannerConfig& cfg);

struct EnsembleSummary {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double mean_plans = 0.0;
  double mean_perception = 0.0;

  static std::string csv_header();  // variant,success,steps,plans,perception
  std::string csv_row(const std::string& variant) const;
};
EnsembleSummary run_ensemble(const Model& mdp, const Dfa& dfa,
                             const GroundTruth& truth,
                             const ObservationModel& om,
                             const BeliefLabeling& prior,
                             const PlannerConfig& cfg, int episodes);

// Violating-controller diagnosis: reachable (node, state) pairs whose values
// breach the specification, and the mean normalized action entropy over the
// decision points among them. A satisfied specification yields an empty set
// and no entropy value.
struct CriticalReport {
  std::vector<std::pair<int, int>> crit;  // (node, state)
  std::optional<double> entropy;
  std::string to_json() const;
};
CriticalReport entropy_over_critical(const Model& m, const Fsc& fsc,
                                     const Spec& spec);

}  // namespace verisynth
