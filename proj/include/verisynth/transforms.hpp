#pragma once

#include <utility>
#include <vector>

#include "verisynth/model.hpp"

namespace verisynth {

// Markov chain induced by a model and a (memoryless) policy:
// P(s, s') = sum_a sigma(s, a) * P(s, a, s'). Under a deterministic policy,
// interval and parametric entries are carried through unchanged. Under a
// randomized policy, interval contributions from different actions merge into
// [sum sigma*lo, sum sigma*hi], which over-approximates the true
// (per-action-rectangular) uncertainty set; the checker therefore evaluates
// FSCs and policies on interval models with a structured recursion instead of
// this merge. States the policy leaves undefined must be unreachable from the
// initial distribution; their rows fall back to the uniform mixture.
Model induced_mc(const Model& m, const Policy& policy);

// Turns stochastic observations into deterministic ones by splitting each
// state s into copies (s, z), one per observation in the support of O(s),
// with incoming probability mass scaled by O(s)(z). Values to any target set
// are preserved (interval bounds scale per-entry, which for interval inputs
// widens the row polytope conservatively).
Model expand_observations(const Model& m);

// Product of a POMDP with the k-node memory skeleton: states S x {0..k-1},
// observations Z x {0..k-1}, actions Act x {0..k-1}. Choosing product action
// (a, n') plays a and moves the memory to n', so memoryless observation-based
// policies on the product are in bijection with k-node FSCs on the input.
// For k = 1 the model is returned unchanged (indices already line up).
struct FscProductInfo {
  Model model;
  int k = 1;
  int base_states = 0;
  int base_obs = 0;
  int base_actions = 0;

  int product_state(int s, int n) const { return s * k + n; }
  int product_obs(int z, int n) const { return z * k + n; }
  int product_action(int a, int n2) const { return a * k + n2; }
  // Lifts a per-state mask of the input model to the product.
  std::vector<char> lift_mask(const std::vector<char>& mask) const;
  // Folds a memoryless observation-based product policy back into a k-node
  // FSC on the input model: action_map(n,z)(a) = sum_{n'} sigma(z,n)(a,n'),
  // memory_update(n,z,a)(n') = sigma(z,n)(a,n') / action_map(n,z)(a).
  Fsc fold_back(const Policy& product_policy) const;
};
FscProductInfo fsc_product_info(const Model& m, int k);
Model fsc_product(const Model& m, int k);

// Normal form where every state either offers at most two actions with
// deterministic outcomes (choice states) or a single action with an
// uncertain/stochastic outcome row (uncertainty states). States with two
// non-Dirac rows keep the choice and push each row into a fresh outcome
// state; states with m >= 3 actions become a relay into a binary decision
// tree of m-1 fresh choice states whose leaf edges carry the original costs.
// Auxiliary states receive observations derived from (parent observation,
// construction position), so the transformation preserves the bijection
// between observation-based policies on both models.
struct SimpleForm {
  Model model;
  std::vector<int> state_map;  // original state -> transformed state
  // Per original observation: the enabled actions in sorted order, and for
  // each such action slot the decision path that commits to it, given as
  // (transformed obs, transformed action) pairs. Single-action observations
  // have the empty path.
  std::vector<std::vector<int>> slot_actions;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> paths;
};
SimpleForm to_simple_info(const Model& m);
Model to_simple(const Model& m);

// Folds an observation-based policy on the simple model back to the original
// observations: the probability of original action a under observation z is
// the product of the branch probabilities along its decision path.
Policy fold_simple_policy(const SimpleForm& sf, const Policy& simple_policy);

}  // namespace verisynth
