#pragma once

// Hand-built models shared across the test suites, with their exact
// reference values worked out independently of the library (by hand, on
// paper) and frozen here as constants.

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "verisynth/model.hpp"

namespace zoo {

using verisynth::Choice;
using verisynth::Distr;
using verisynth::Fsc;
using verisynth::Model;
using verisynth::Policy;
using verisynth::ProbEntry;
using verisynth::Transition;

inline Transition tr(int to, double p) { return {to, ProbEntry::point(p)}; }
inline Transition tri(int to, double lo, double hi) {
  return {to, ProbEntry::interval(lo, hi)};
}

// --------------------------------------------------------------------------
// Eight-state MDP with a single decision layer.
//
//   s0 --(0.7)--> s1, --(0.3)--> s2          (one action)
//   s1 --(0.5)--> s3, --(0.5)--> s4          (one action)
//   s2 --(0.5)--> s5, --(0.5)--> s4          (one action)
//   s3: a = stay, b = s6
//   s4: a = s6,  b = stay
//   s5: a = {0.3 s6, 0.7 s7}, b = s7
//   s6, s7: absorbing
//
// Reaching {s6}: the best choices are b at s3, a at s4, a at s5, giving
// v(s5)=0.3, v(s3)=v(s4)=1, v(s1)=1, v(s2)=0.65, v(s0)=0.7+0.3*0.65=0.895.
// Switching s5 to b gives v(s5)=0 and v(s0)=0.85.  Only s7 has maximal
// reach probability zero.
inline constexpr double kEightStateBest = 0.895;
inline constexpr double kEightStateSecond = 0.85;

inline Model eight_state_mdp() {
  Model m;
  m.kind = Model::Kind::mdp;
  m.num_states = 8;
  m.initial = {{0, 1.0}};
  m.action_names = {"a", "b"};
  m.choices.resize(8);
  m.choices[0] = {{0, {tr(1, 0.7), tr(2, 0.3)}, 0.0}};
  m.choices[1] = {{0, {tr(3, 0.5), tr(4, 0.5)}, 0.0}};
  m.choices[2] = {{0, {tr(5, 0.5), tr(4, 0.5)}, 0.0}};
  m.choices[3] = {{0, {tr(3, 1.0)}, 0.0}, {1, {tr(6, 1.0)}, 0.0}};
  m.choices[4] = {{0, {tr(6, 1.0)}, 0.0}, {1, {tr(4, 1.0)}, 0.0}};
  m.choices[5] = {{0, {tr(6, 0.3), tr(7, 0.7)}, 0.0}, {1, {tr(7, 1.0)}, 0.0}};
  m.choices[6] = {{0, {tr(6, 1.0)}, 0.0}};
  m.choices[7] = {{0, {tr(7, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {}, {}, {}, {}, {}, {0}, {}};
  return m;
}

// The two policies discussed above (rows for single-action states pick a).
inline Policy eight_state_best_policy() {
  return Policy::deterministic(Policy::Kind::state_based,
                               {0, 0, 0, 1, 0, 0, 0, 0});
}
inline Policy eight_state_second_policy() {
  return Policy::deterministic(Policy::Kind::state_based,
                               {0, 0, 0, 1, 0, 1, 0, 0});
}

// --------------------------------------------------------------------------
// Five-state POMDP where memory beats every memoryless controller.
//
//   s0: up -> s1, down -> s2        (all three share observation "mid")
//   s1: up -> s4, down -> s3
//   s2: up -> s3, down -> s4
//   s3 (goal), s4 (sink): absorbing, own observations.
//
// A memoryless controller playing up with probability p reaches the goal
// with probability p(1-p) + (1-p)p = 2p(1-p), at most 1/2.  A two-node
// controller (up first, then down) reaches it with probability 1.
inline Model two_step_pomdp() {
  Model m;
  m.kind = Model::Kind::pomdp;
  m.num_states = 5;
  m.initial = {{0, 1.0}};
  m.action_names = {"up", "down"};
  m.choices.resize(5);
  m.choices[0] = {{0, {tr(1, 1.0)}, 0.0}, {1, {tr(2, 1.0)}, 0.0}};
  m.choices[1] = {{0, {tr(4, 1.0)}, 0.0}, {1, {tr(3, 1.0)}, 0.0}};
  m.choices[2] = {{0, {tr(3, 1.0)}, 0.0}, {1, {tr(4, 1.0)}, 0.0}};
  m.choices[3] = {{0, {tr(3, 1.0)}, 0.0}, {1, {tr(3, 1.0)}, 0.0}};
  m.choices[4] = {{0, {tr(4, 1.0)}, 0.0}, {1, {tr(4, 1.0)}, 0.0}};
  m.obs_names = {"mid", "at-goal", "at-sink"};
  m.observation = {0, 0, 0, 1, 2};
  m.prop_names = {"goal"};
  m.labels = {{}, {}, {}, {0}, {}};
  return m;
}

// The memoryless controller playing up with probability p.
inline Fsc one_node_mixture(const Model& m, double p) {
  Fsc f;
  f.num_nodes = 1;
  f.initial_node = 0;
  Distr row;  // zero-mass actions are simply absent from the support
  if (p > 0.0) row.push_back({0, p});
  if (p < 1.0) row.push_back({1, 1.0 - p});
  f.action_map = {{row, row, row}};
  f.memory_update.assign(
      1, std::vector<std::vector<Distr>>(
             m.num_obs(), std::vector<Distr>(m.num_actions(), {{0, 1.0}})));
  return f;
}

// The two-node controller that solves the model exactly.
inline Fsc two_node_solution(const Model& m) {
  Fsc f;
  f.num_nodes = 2;
  f.initial_node = 0;
  f.action_map = {{{{0, 1.0}}, {{0, 1.0}}, {{0, 1.0}}},
                  {{{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}}};
  f.memory_update.assign(
      2, std::vector<std::vector<Distr>>(
             m.num_obs(), std::vector<Distr>(m.num_actions(), {{1, 1.0}})));
  return f;
}

// --------------------------------------------------------------------------
// Three-coin parametric chain: success requires v, then 1-v, then v, so the
// reach probability is v^2(1-v) with maximum 4/27 at v = 2/3 and value 1/8
// at v = 1/2.
inline Model coin_chain_pmc(double lo = 0.001, double hi = 0.999) {
  Model m;
  m.kind = Model::Kind::mc;
  m.num_states = 5;
  m.initial = {{0, 1.0}};
  m.params = {"v"};
  m.param_ranges = {{lo, hi}};
  const auto v = ProbEntry::affine(0.0, {{0, 1.0}});
  const auto w = ProbEntry::affine(1.0, {{0, -1.0}});
  m.choices.resize(5);
  m.choices[0] = {{-1, {{1, v}, {4, w}}, 0.0}};
  m.choices[1] = {{-1, {{2, w}, {4, v}}, 0.0}};
  m.choices[2] = {{-1, {{3, v}, {4, w}}, 0.0}};
  m.choices[3] = {{-1, {tr(3, 1.0)}, 0.0}};
  m.choices[4] = {{-1, {tr(4, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {}, {}, {0}, {}};
  return m;
}

inline double coin_chain_value(double v) { return v * v * (1.0 - v); }

// --------------------------------------------------------------------------
// Binomial-tree chain whose reach probability is the cubic
//
//   p(v) = 0.5 v^3 - 0.7725 v^2 + 0.3256 v + 0.09962875,
//
// realized over three success/failure rounds with success probability v and
// leaf acceptance probabilities equal to the cubic's Bernstein coefficients
//   b0 = 0.09962875           b1 = b0 + a1/3
//   b2 = b0 + 2 a1/3 + a2/3   b3 = p(1) = 0.15272875.
// The cubic crosses 0.13 exactly at v = 0.13, 0.525 and 0.89, so over the
// unit box the satisfying region of "reach >= 0.13" is
// [0.13, 0.525] u [0.89, 1] with measure 0.505.
inline constexpr double kCubicThreshold = 0.13;
inline constexpr double kCubicRegionMeasure = 0.505;

inline double cubic_value(double v) {
  return 0.5 * v * v * v - 0.7725 * v * v + 0.3256 * v + 0.09962875;
}

inline Model cubic_tree_pmc() {
  const double a0 = 0.09962875, a1 = 0.3256, a2 = -0.7725, a3 = 0.5;
  const double b[4] = {a0, a0 + a1 / 3.0, a0 + 2.0 * a1 / 3.0 + a2 / 3.0,
                       a0 + a1 + a2 + a3};
  Model m;
  m.kind = Model::Kind::mc;
  // Levels 0..3 hold 1+2+3+4 nodes indexed by (level, successes); then the
  // accepting state 10 and the rejecting state 11.
  m.num_states = 12;
  m.initial = {{0, 1.0}};
  m.params = {"v"};
  m.param_ranges = {{0.0, 1.0}};
  const auto v = ProbEntry::affine(0.0, {{0, 1.0}});
  const auto w = ProbEntry::affine(1.0, {{0, -1.0}});
  auto node = [](int level, int successes) {
    static const int offset[4] = {0, 1, 3, 6};
    return offset[level] + successes;
  };
  m.choices.resize(12);
  for (int level = 0; level < 3; ++level)
    for (int i = 0; i <= level; ++i)
      m.choices[node(level, i)] = {
          {-1, {{node(level + 1, i + 1), v}, {node(level + 1, i), w}}, 0.0}};
  for (int i = 0; i <= 3; ++i)
    m.choices[node(3, i)] = {{-1, {tr(10, b[i]), tr(11, 1.0 - b[i])}, 0.0}};
  m.choices[10] = {{-1, {tr(10, 1.0)}, 0.0}};
  m.choices[11] = {{-1, {tr(11, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels.assign(12, {});
  m.labels[10] = {0};
  return m;
}

// --------------------------------------------------------------------------
// Interval toys.

// One uncertain coin: nature can push the success probability anywhere in
// [0.5, 0.95], so the guaranteed value is 0.5 and the optimistic one 0.95.
inline Model interval_coin_mc() {
  Model m;
  m.kind = Model::Kind::mc;
  m.num_states = 3;
  m.initial = {{0, 1.0}};
  m.choices.resize(3);
  m.choices[0] = {{-1, {tri(1, 0.5, 0.95), tri(2, 0.05, 0.5)}, 0.0}};
  m.choices[1] = {{-1, {tr(1, 1.0)}, 0.0}};
  m.choices[2] = {{-1, {tr(2, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {0}, {}};
  return m;
}

// Gamble (interval [0.5, 0.95]) against a safe coin (0.6): the nominal
// midpoint favours the gamble (0.725), the worst case favours the safe coin.
inline Model gamble_or_safe_mdp() {
  Model m;
  m.kind = Model::Kind::mdp;
  m.num_states = 3;
  m.initial = {{0, 1.0}};
  m.action_names = {"gamble", "safe"};
  m.choices.resize(3);
  m.choices[0] = {{0, {tri(1, 0.5, 0.95), tri(2, 0.05, 0.5)}, 0.0},
                  {1, {tr(1, 0.6), tr(2, 0.4)}, 0.0}};
  m.choices[1] = {{0, {tr(1, 1.0)}, 0.0}};
  m.choices[2] = {{0, {tr(2, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {0}, {}};
  return m;
}

// The same model with every observation attached, for controller synthesis.
inline Model gamble_or_safe_pomdp() {
  Model m = gamble_or_safe_mdp();
  m.kind = Model::Kind::pomdp;
  m.obs_names = {"start", "won", "lost"};
  m.observation = {0, 1, 2};
  // Give the absorbing states both actions so action sets stay
  // observation-consistent.
  m.choices[1] = {{0, {tr(1, 1.0)}, 0.0}, {1, {tr(1, 1.0)}, 0.0}};
  m.choices[2] = {{0, {tr(2, 1.0)}, 0.0}, {1, {tr(2, 1.0)}, 0.0}};
  return m;
}

// --------------------------------------------------------------------------
// Tiny cost chain: from s0 the cheap route takes two steps of cost 1, the
// direct route one step of cost 3.  Minimal expected cost to the goal is 2.
inline Model cost_chain_mdp() {
  Model m;
  m.kind = Model::Kind::mdp;
  m.num_states = 3;
  m.initial = {{0, 1.0}};
  m.action_names = {"cheap", "direct"};
  m.choices.resize(3);
  m.choices[0] = {{0, {tr(1, 1.0)}, 1.0}, {1, {tr(2, 1.0)}, 3.0}};
  m.choices[1] = {{0, {tr(2, 1.0)}, 1.0}};
  m.choices[2] = {{0, {tr(2, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {}, {0}};
  return m;
}

// --------------------------------------------------------------------------
// Randomized model generators (reproducible via the caller's engine).

// Normalizes to an exact unit sum: the last entry absorbs the rounding.
inline std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) sum += (x = unit(rng));
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    p[i] = p[i] / sum;
    acc += p[i];
  }
  p[n - 1] = 1.0 - acc;
  return p;
}

// A connected-ish MDP with <= max_states states and <= max_actions actions,
// a goal label on the last state, and point probabilities that sum to one
// exactly.
inline Model random_mdp(std::mt19937_64& rng, int max_states = 8,
                        int max_actions = 3) {
  std::uniform_int_distribution<int> nstates(2, max_states);
  const int n = nstates(rng);
  std::uniform_int_distribution<int> nact(1, max_actions);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Model m;
  m.kind = Model::Kind::mdp;
  m.num_states = n;
  m.initial = {{0, 1.0}};
  m.action_names = {"a", "b", "c"};
  m.action_names.resize(max_actions);
  for (int a = 0; a < max_actions; ++a)
    m.action_names[a] = std::string(1, static_cast<char>('a' + a));
  m.choices.resize(n);
  for (int s = 0; s < n; ++s) {
    const int acts = nact(rng);
    for (int a = 0; a < acts; ++a) {
      std::uniform_int_distribution<int> nsucc(1, std::min(3, n));
      const int k = nsucc(rng);
      std::vector<int> succ;
      while (static_cast<int>(succ.size()) < k) {
        const int t = pick(rng);
        bool seen = false;
        for (int u : succ) seen |= (u == t);
        if (!seen) succ.push_back(t);
      }
      const std::vector<double> p = random_distribution(rng, k);
      Choice c;
      c.action = a;
      for (int i = 0; i < k; ++i) c.transitions.push_back(tr(succ[i], p[i]));
      c.cost = 0.0;
      m.choices[s].push_back(c);
    }
  }
  m.prop_names = {"goal"};
  m.labels.assign(n, {});
  m.labels[n - 1] = {0};
  return m;
}

// Random interval POMDP built around a point nominal: each transition entry
// widens to [p - w, p + w] clipped inside (0, 1], so the interval row always
// straddles a valid distribution and the midpoint recovers the nominal.
inline Model random_interval_pomdp(std::mt19937_64& rng, int max_states = 6) {
  std::uniform_int_distribution<int> nstates(3, max_states);
  const int n = nstates(rng);
  std::uniform_int_distribution<int> nobs(1, std::max(1, n - 2));
  const int zs = nobs(rng);
  std::uniform_real_distribution<double> width(0.0, 0.2);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Model m;
  m.kind = Model::Kind::pomdp;
  m.num_states = n;
  m.initial = {{0, 1.0}};
  m.action_names = {"a", "b"};
  m.choices.resize(n);
  // Non-absorbing states share observation classes; goal and sink get their
  // own so action sets stay observation-consistent.
  m.obs_names.clear();
  for (int z = 0; z < zs; ++z) m.obs_names.push_back("o" + std::to_string(z));
  m.obs_names.push_back("at-goal");
  m.obs_names.push_back("at-sink");
  m.observation.assign(n, 0);
  std::uniform_int_distribution<int> zpick(0, zs - 1);
  for (int s = 0; s < n - 2; ++s) m.observation[s] = zpick(rng);
  m.observation[n - 2] = zs;      // goal
  m.observation[n - 1] = zs + 1;  // sink
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      Choice c;
      c.action = a;
      if (s >= n - 2) {
        c.transitions.push_back(tr(s, 1.0));
      } else {
        const int k = 2;
        std::vector<int> succ;
        succ.push_back(pick(rng));
        int t = pick(rng);
        while (t == succ[0]) t = pick(rng);
        succ.push_back(t);
        const std::vector<double> p = random_distribution(rng, k);
        for (int i = 0; i < k; ++i) {
          const double w =
              std::min({width(rng), p[i] - 1e-3, 1.0 - p[i] - 1e-3});
          if (w > 0.0)
            c.transitions.push_back(tri(succ[i], p[i] - w, p[i] + w));
          else
            c.transitions.push_back(tr(succ[i], p[i]));
        }
      }
      m.choices[s].push_back(c);
    }
  }
  m.prop_names = {"goal"};
  m.labels.assign(n, {});
  m.labels[n - 2] = {0};
  return m;
}

// Collapses every interval entry to its midpoint.  For models built by
// random_interval_pomdp the midpoints are the nominal distribution.
inline Model midpoint_collapse(const Model& m) {
  Model out = m;
  for (auto& row : out.choices)
    for (Choice& c : row)
      for (Transition& t : c.transitions)
        if (t.prob.is_interval())
          t.prob = ProbEntry::point(0.5 * (t.prob.lo + t.prob.hi));
  return out;
}

// A random deterministic-observation POMDP controller.
inline Fsc random_fsc(std::mt19937_64& rng, const Model& m, int k) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Fsc f;
  f.num_nodes = k;
  f.initial_node = 0;
  f.action_map.assign(k, std::vector<Distr>(m.num_obs()));
  f.memory_update.assign(
      k, std::vector<std::vector<Distr>>(
             m.num_obs(), std::vector<Distr>(m.num_actions())));
  for (int node = 0; node < k; ++node)
    for (int z = 0; z < m.num_obs(); ++z) {
      const std::vector<int> acts = m.actions_at_obs(z);
      std::vector<double> p = random_distribution(rng, acts.size());
      for (size_t i = 0; i < acts.size(); ++i)
        f.action_map[node][z].push_back({acts[i], p[i]});
      for (int a = 0; a < m.num_actions(); ++a) {
        std::vector<double> q = random_distribution(rng, k);
        for (int n2 = 0; n2 < k; ++n2)
          f.memory_update[node][z][a].push_back({n2, q[n2]});
      }
    }
  return f;
}

}  // namespace zoo
