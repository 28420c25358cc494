#pragma once

#include <cstdint>
#include <string>

#include "verisynth/model.hpp"
#include "verisynth/model_io.hpp"

namespace verisynth {

// A generated model together with its conventional objective. Generators are
// deterministic in (kind, size, seed) and every emitted model re-validates.
struct Benchmark {
  std::string name;
  Model model;
  Spec spec;
};

// kind "grid": square c x c gridworld with 4 cardinal actions, uniform
//   initial placement, and a goal in the top-right corner; the agent only
//   observes whether it stands on the goal.
// kind "maze": corridor maze with c + 2 rows (Maze(1) is the classic
//   11-location layout), wall-configuration observations plus a dedicated
//   goal observation, uniform initial placement outside the goal.
// kind "navigation": square c x c gridworld with seeded static obstacles and
//   one stochastically moving obstacle; the agent knows its own cell and
//   sees the obstacle's relative position (8 neighbor directions) only when
//   adjacent. Reaching the goal / colliding are absorbing.
Benchmark generate_benchmark(const std::string& kind, int c,
                             std::uint64_t seed);

// A reach-avoid planning instance on a c x c grid: point MDP with cardinal
// moves, a 3-state task automaton (reach "goal" while avoiding "obst"), a
// seeded ground-truth obstacle field that keeps one staircase path clear,
// a deliberately optimistic obstacle prior, and a short-range noisy sensor.
struct PlannerInstance {
  Model mdp;
  Dfa dfa;
  GroundTruth truth;
  BeliefLabeling prior;
  ObservationModel obs;
};
PlannerInstance make_reach_avoid(int c, double density, std::uint64_t seed);

}  // namespace verisynth
