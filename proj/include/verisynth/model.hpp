#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace verisynth {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse distribution over indices (states, actions, or memory nodes).
using Distr = std::vector<std::pair<int, double>>;

// One transition probability: a point value, a closed interval, or an affine
// expression  constant + sum_j coeff_j * param_j  over model parameters.
struct ProbEntry {
  enum class Kind { point, interval, affine };
  Kind kind = Kind::point;
  double lo = 0.0;  // point value when kind == point; interval bounds otherwise
  double hi = 0.0;
  double constant = 0.0;                       // affine constant term
  std::vector<std::pair<int, double>> coeffs;  // affine: (param index, coeff)

  static ProbEntry point(double p);
  static ProbEntry interval(double lo, double hi);
  static ProbEntry affine(double constant,
                          std::vector<std::pair<int, double>> coeffs);

  bool is_point() const { return kind == Kind::point; }
  bool is_interval() const { return kind == Kind::interval; }
  bool is_affine() const { return kind == Kind::affine; }
  double value() const;  // point entries only
  // Evaluates the entry at a parameter assignment (point/affine only).
  double eval(const std::vector<double>& params) const;

  bool operator==(const ProbEntry&) const = default;
};

struct Transition {
  int to = 0;
  ProbEntry prob;
  bool operator==(const Transition&) const = default;
};

// One enabled action at a state: its distribution row and stage cost (read as
// a reward when the specification asks for one; same scalar either way).
struct Choice {
  int action = -1;  // index into Model::action_names; -1 for Markov chains
  std::vector<Transition> transitions;
  double cost = 0.0;
  bool operator==(const Choice&) const = default;
};

struct Model {
  enum class Kind { mc, mdp, pomdp };
  Kind kind = Kind::mc;
  int num_states = 0;
  Distr initial;  // initial distribution; a single initial state is {(s, 1)}
  std::vector<std::string> action_names;
  std::vector<std::vector<Choice>> choices;  // per state

  // Observations (POMDP only). A state has either a deterministic observation
  // index or a distribution over observations (pre expand_observations).
  std::vector<int> observation;       // per state; -1 when stochastic
  std::vector<Distr> obs_dist;        // per state; empty when deterministic
  std::vector<std::string> obs_names;

  // Atomic-proposition labels per state (indices into prop_names).
  std::vector<std::string> prop_names;
  std::vector<std::vector<int>> labels;

  // Parameters for affine entries, with box ranges.
  std::vector<std::string> params;
  std::vector<std::pair<double, double>> param_ranges;

  // Optional per-state planar coordinates (benchmarks; sensor visibility).
  std::vector<std::pair<double, double>> coords;

  int num_actions() const { return static_cast<int>(action_names.size()); }
  int num_obs() const { return static_cast<int>(obs_names.size()); }
  int num_params() const { return static_cast<int>(params.size()); }
  bool has_intervals() const;
  bool has_params() const { return !params.empty(); }
  // The unique initial state; errors when the initial distribution is spread.
  int initial_state() const;
  std::string state_name(int s) const { return "s" + std::to_string(s); }
  int action_index(const std::string& name) const;  // -1 when unknown
  int obs_index(const std::string& name) const;     // -1 when unknown
  int prop_index(const std::string& name) const;    // -1 when unknown
  bool has_label(int s, int prop) const;
  // Sorted action indices enabled at a state / shared by an observation.
  std::vector<int> actions_at(int s) const;
  std::vector<int> actions_at_obs(int z) const;

  // Checks every structural invariant; throws ModelError naming the offending
  // state/action row. Called by the parser and by every transform.
  void validate() const;

  bool operator==(const Model&) const = default;
};

// Memoryless policy, indexed by state or by observation.
struct Policy {
  enum class Kind { state_based, observation_based };
  Kind kind = Kind::state_based;
  std::vector<Distr> rows;  // rows[s] or rows[z]: distribution over actions

  static Policy deterministic(Kind kind, const std::vector<int>& actions);
  bool is_deterministic() const;
  const Distr& row_for_state(const Model& m, int s) const;
  double prob(const Model& m, int s, int action) const;
  void validate(const Model& m) const;

  bool operator==(const Policy&) const = default;
};

// Finite-state controller: at node n under observation z, draw an action from
// action_map[n][z]; after playing a, move to the node drawn from
// memory_update[n][z][a].
struct Fsc {
  int num_nodes = 0;
  int initial_node = 0;
  std::vector<std::vector<Distr>> action_map;                // [n][z] -> actions
  std::vector<std::vector<std::vector<Distr>>> memory_update;  // [n][z][a] -> nodes

  static Fsc uniform(const Model& m, int k);
  static Fsc from_policy(const Model& m, const Policy& p);  // 1-node FSC
  bool is_deterministic() const;
  void validate(const Model& m) const;

  bool operator==(const Fsc&) const = default;
};

// Reachability / expected-cost query with a threshold.
//   text form: ("reach"|"cost") ["max"|"min"] (">="|"<=") VALUE "{" targets "}"
// Targets are state tokens ("s6" or "6") or label names. The policy
// quantifier defaults to the synthesis-friendly direction (max for reach,
// min for cost) unless given explicitly.
struct Spec {
  enum class Kind { reach, cost };
  enum class Direction { at_least, at_most };
  enum class Optimize { maximize, minimize };
  Kind kind = Kind::reach;
  Direction direction = Direction::at_least;
  Optimize optimize = Optimize::maximize;
  double threshold = 0.0;
  std::vector<std::string> targets;

  static Spec parse(const std::string& text);
  std::string str() const;
  // Resolves target tokens against a model: mask[s] == 1 iff s is a target.
  std::vector<char> target_mask(const Model& m) const;
  bool satisfied_by(double value) const;
  // Against interval uncertainty, nature opposes the comparison direction:
  // it minimizes the value for ">=" specs and maximizes it for "<=" specs.
  bool nature_minimizes() const { return direction == Direction::at_least; }
  bool maximize() const { return optimize == Optimize::maximize; }

  bool operator==(const Spec&) const = default;
};

// Deterministic finite automaton over labelings. Guards are conjunctions of
// proposition literals; omitted propositions are wildcards. Edges are tried
// in listed order (first match), and every state must carry a catch-all
// default edge so the transition function is total.
struct Dfa {
  struct Edge {
    int from = 0;
    int to = 0;
    std::vector<std::pair<int, bool>> guard;  // (prop index, required value)
    bool operator==(const Edge&) const = default;
  };
  std::vector<std::string> props;
  int num_states = 0;
  int init = 0;
  std::vector<char> accepting;  // flag per state
  std::vector<Edge> edges;

  int prop_index(const std::string& name) const;
  // Transition on a valuation (one flag per proposition).
  int step(int q, const std::vector<char>& valuation) const;
  bool is_accepting(int q) const { return accepting[q] != 0; }
  void validate() const;

  bool operator==(const Dfa&) const = default;
};

// Independent Bernoulli belief over which propositions hold at which states:
// b[s][p] = probability that proposition p holds at state s.
struct BeliefLabeling {
  std::vector<std::string> props;
  std::vector<std::vector<double>> b;  // [state][prop]

  int num_states() const { return static_cast<int>(b.size()); }
  int num_props() const { return static_cast<int>(props.size()); }
  static BeliefLabeling uniform(int num_states, std::vector<std::string> props,
                                double p = 0.5);
  void validate() const;

  bool operator==(const BeliefLabeling&) const = default;
};

// Sensor model for label readings: a reading of proposition p at state s is
// true with probability true_positive when p actually holds and
// false_positive when it does not. Readings cover states within `radius` of
// the agent (Euclidean over Model::coords); radius < 0 means unlimited.
struct ObservationModel {
  double true_positive = 0.9;
  double false_positive = 0.2;
  double radius = -1.0;
  std::map<std::string, std::pair<double, double>> per_prop;  // overrides

  std::pair<double, double> rates_for(const std::string& prop) const;
  bool visible(const Model& m, int agent_state, int target_state) const;
  void validate() const;

  bool operator==(const ObservationModel&) const = default;
};

}  // namespace verisynth
