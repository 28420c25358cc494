#include "verisynth/benchgen.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <vector>

namespace verisynth {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Cardinal directions in action order north, east, south, west (y grows up).
constexpr int kDx[4] = {0, 1, 0, -1};
constexpr int kDy[4] = {1, 0, -1, 0};
const char* kDirNames[4] = {"north", "east", "south", "west"};

void add_dirac(Model& m, int s, int action, int to, double cost) {
  Choice ch;
  ch.action = action;
  ch.cost = cost;
  ch.transitions.push_back({to, ProbEntry::point(1.0)});
  m.choices[s].push_back(std::move(ch));
}

// c x c gridworld, goal top-right, observable only at the goal.
Benchmark make_grid(int c) {
  Benchmark out;
  out.name = "grid-" + std::to_string(c);
  Model& m = out.model;
  m.kind = Model::Kind::pomdp;
  m.num_states = c * c;
  m.action_names = {kDirNames[0], kDirNames[1], kDirNames[2], kDirNames[3]};
  m.obs_names = {"elsewhere", "at-goal"};
  m.prop_names = {"goal"};
  m.choices.resize(m.num_states);
  m.labels.resize(m.num_states);
  m.observation.assign(m.num_states, 0);
  const auto pos = [&](int x, int y) { return y * c + x; };
  const int goal = pos(c - 1, c - 1);
  m.labels[goal].push_back(0);
  m.observation[goal] = 1;
  for (int y = 0; y < c; ++y)
    for (int x = 0; x < c; ++x) {
      const int s = pos(x, y);
      m.coords.push_back({static_cast<double>(x), static_cast<double>(y)});
      m.initial.push_back({s, 1.0 / (c * c)});
      for (int d = 0; d < 4; ++d) {
        if (s == goal) {
          add_dirac(m, s, d, s, 0.0);
          continue;
        }
        const int nx = x + kDx[d], ny = y + kDy[d];
        const bool bump = nx < 0 || nx >= c || ny < 0 || ny >= c;
        add_dirac(m, s, d, bump ? s : pos(nx, ny), 1.0);
      }
    }
  m.validate();
  out.spec = Spec::parse("reach max >= 0.9 { goal }");
  return out;
}

// Corridor maze with c + 2 rows: a 5-cell top corridor and three vertical
// legs of c + 1 cells below columns 0, 2 and 4; the goal sits at the bottom
// of the middle leg. States observe their wall configuration; the goal has
// its own observation, so Maze(1) has 11 locations and 7 observations.
Benchmark make_maze(int c) {
  Benchmark out;
  out.name = "maze-" + std::to_string(c);
  Model& m = out.model;
  m.kind = Model::Kind::pomdp;
  m.action_names = {kDirNames[0], kDirNames[1], kDirNames[2], kDirNames[3]};
  m.prop_names = {"goal"};

  // Cell layout: top corridor at y = c + 1, legs at x in {0, 2, 4} spanning
  // y = 0 .. c. Indices follow the corridor left-to-right, then leg rows
  // top-to-bottom, so Maze(1) numbers its states 0..10 with the goal at 9.
  std::vector<std::pair<int, int>> cells;
  for (int x = 0; x < 5; ++x) cells.push_back({x, c + 1});
  for (int y = c; y >= 0; --y)
    for (int x : {0, 2, 4}) cells.push_back({x, y});
  std::map<std::pair<int, int>, int> index;
  for (size_t i = 0; i < cells.size(); ++i)
    index[cells[i]] = static_cast<int>(i);
  const int goal = index[{2, 0}];

  m.num_states = static_cast<int>(cells.size());
  m.choices.resize(m.num_states);
  m.labels.resize(m.num_states);
  m.labels[goal].push_back(0);
  m.observation.assign(m.num_states, -1);

  // Observation classes keyed by the 4-bit wall profile, goal separate.
  std::map<int, int> profile_obs;
  for (int s = 0; s < m.num_states; ++s) {
    const auto [x, y] = cells[s];
    m.coords.push_back({static_cast<double>(x), static_cast<double>(y)});
    if (s != goal)
      m.initial.push_back({s, 1.0 / (m.num_states - 1)});
    int profile = 0;
    for (int d = 0; d < 4; ++d)
      if (!index.count({x + kDx[d], y + kDy[d]})) profile |= 1 << d;
    if (s == goal) continue;
    if (!profile_obs.count(profile)) {
      std::string name = "walls";
      for (int d = 0; d < 4; ++d)
        if (profile & (1 << d)) name += std::string("-") + kDirNames[d];
      profile_obs[profile] = static_cast<int>(m.obs_names.size());
      m.obs_names.push_back(name);
    }
    m.observation[s] = profile_obs[profile];
  }
  m.observation[goal] = static_cast<int>(m.obs_names.size());
  m.obs_names.push_back("at-goal");

  for (int s = 0; s < m.num_states; ++s) {
    const auto [x, y] = cells[s];
    for (int d = 0; d < 4; ++d) {
      if (s == goal) {
        add_dirac(m, s, d, s, 0.0);
        continue;
      }
      const auto it = index.find({x + kDx[d], y + kDy[d]});
      add_dirac(m, s, d, it == index.end() ? s : it->second, 1.0);
    }
  }
  m.validate();
  out.spec = Spec::parse("reach max >= 0.9 { goal }");
  return out;
}

// c x c gridworld with seeded static obstacles and one uniformly moving
// obstacle; agent cell known, obstacle seen only when adjacent (8 relative
// positions). Collision and goal are absorbing.
Benchmark make_navigation(int c, std::uint64_t seed) {
  Benchmark out;
  out.name = "navigation-" + std::to_string(c);
  Model& m = out.model;
  m.kind = Model::Kind::pomdp;
  m.action_names = {kDirNames[0], kDirNames[1], kDirNames[2], kDirNames[3]};
  m.prop_names = {"goal", "crash"};

  const auto cell = [&](int x, int y) { return y * c + x; };
  const int agent0 = cell(0, 0);
  const int goal = cell(c - 1, c - 1);
  const int mover0 = cell(c - 1, 0);

  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<char> wall(c * c, 0);
  for (int s = 0; s < c * c; ++s) {
    const bool protect = s == agent0 || s == goal || s == mover0;
    if (!protect && unit(rng) < 0.15) wall[s] = 1;
  }

  // States: (agent, obstacle) pairs followed by the two absorbing sinks.
  const int pairs = c * c * c * c;
  const int done = pairs, crash = pairs + 1;
  m.num_states = pairs + 2;
  m.choices.resize(m.num_states);
  m.labels.resize(m.num_states);
  m.labels[done].push_back(0);
  m.labels[crash].push_back(1);
  m.observation.assign(m.num_states, -1);

  // Observations: agent cell x obstacle relative position (far or one of the
  // 8 neighbor directions), plus the two absorbing classes.
  const char* kRel[9] = {"far", "n", "ne", "e", "se", "s", "sw", "w", "nw"};
  const int kRelDx[9] = {0, 0, 1, 1, 1, 0, -1, -1, -1};
  const int kRelDy[9] = {0, 1, 1, 0, -1, -1, -1, 0, 1};
  for (int a = 0; a < c * c; ++a)
    for (int r = 0; r < 9; ++r)
      m.obs_names.push_back("a" + std::to_string(a % c) + "-" +
                            std::to_string(a / c) + "-" + kRel[r]);
  const int obs_done = static_cast<int>(m.obs_names.size());
  m.obs_names.push_back("at-goal");
  m.obs_names.push_back("crashed");
  m.observation[done] = obs_done;
  m.observation[crash] = obs_done + 1;

  const auto rel_class = [&](int a, int o) {
    const int ax = a % c, ay = a / c, ox = o % c, oy = o / c;
    for (int r = 1; r < 9; ++r)
      if (ox - ax == kRelDx[r] && oy - ay == kRelDy[r]) return r;
    return 0;
  };
  const auto move = [&](int s, int d) {
    const int x = s % c + kDx[d], y = s / c + kDy[d];
    return (x < 0 || x >= c || y < 0 || y >= c) ? s : cell(x, y);
  };

  for (int a = 0; a < c * c; ++a)
    for (int o = 0; o < c * c; ++o) {
      const int s = a * c * c + o;
      m.coords.push_back(
          {static_cast<double>(a % c), static_cast<double>(a / c)});
      m.observation[s] = a * 9 + rel_class(a, o);
      for (int d = 0; d < 4; ++d) {
        const int a2 = move(a, d);
        std::map<int, double> row;
        for (int od = 0; od < 4; ++od) {
          const int o2 = move(o, od);
          int to;
          if (wall[a2] || a2 == o2)
            to = crash;
          else if (a2 == goal)
            to = done;
          else
            to = a2 * c * c + o2;
          row[to] += 0.25;
        }
        Choice ch;
        ch.action = d;
        for (const auto& [to, p] : row)
          ch.transitions.push_back({to, ProbEntry::point(p)});
        m.choices[s].push_back(std::move(ch));
      }
    }
  m.coords.push_back({-1.0, -1.0});
  m.coords.push_back({-1.0, -1.0});
  for (int d = 0; d < 4; ++d) {
    add_dirac(m, done, d, done, 0.0);
    add_dirac(m, crash, d, crash, 0.0);
  }

  int start;
  if (agent0 == goal)
    start = done;
  else if (agent0 == mover0 || wall[agent0])
    start = crash;
  else
    start = agent0 * c * c + mover0;
  m.initial.push_back({start, 1.0});
  m.validate();
  out.spec = Spec::parse("reach max >= 0.75 { goal }");
  return out;
}

}  // namespace

Benchmark generate_benchmark(const std::string& kind, int c,
                             std::uint64_t seed) {
  if (c < 1) throw ModelError("benchmark size must be >= 1");
  if (kind == "grid") return make_grid(c);
  if (kind == "maze") return make_maze(c);
  if (kind == "navigation") return make_navigation(c, seed);
  throw ModelError("unknown benchmark kind '" + kind +
                   "' (expected grid, maze or navigation)");
}

PlannerInstance make_reach_avoid(int c, double density, std::uint64_t seed) {
  if (c < 2) throw ModelError("reach-avoid instances need c >= 2");
  if (density < 0.0 || density > 1.0)
    throw ModelError("obstacle density must lie in [0, 1]");

  PlannerInstance out;
  Model& m = out.mdp;
  m.kind = Model::Kind::mdp;
  m.num_states = c * c;
  m.action_names = {kDirNames[0], kDirNames[1], kDirNames[2], kDirNames[3]};
  m.choices.resize(m.num_states);
  m.labels.resize(m.num_states);
  const auto pos = [&](int x, int y) { return y * c + x; };
  const int start = pos(0, 0), goal = pos(c - 1, c - 1);
  m.initial.push_back({start, 1.0});
  for (int y = 0; y < c; ++y)
    for (int x = 0; x < c; ++x) {
      const int s = pos(x, y);
      m.coords.push_back({static_cast<double>(x), static_cast<double>(y)});
      for (int d = 0; d < 4; ++d) {
        const int nx = x + kDx[d], ny = y + kDy[d];
        const bool bump = nx < 0 || nx >= c || ny < 0 || ny >= c;
        add_dirac(m, s, d, bump ? s : pos(nx, ny), s == goal ? 0.0 : 1.0);
      }
    }
  m.validate();

  // Ground truth: goal in the corner, obstacles seeded everywhere except a
  // random monotone staircase path from start to goal.
  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<char> clear(c * c, 0);
  {
    int x = 0, y = 0;
    clear[pos(x, y)] = 1;
    while (x < c - 1 || y < c - 1) {
      const bool east = y == c - 1 || (x < c - 1 && unit(rng) < 0.5);
      if (east)
        ++x;
      else
        ++y;
      clear[pos(x, y)] = 1;
    }
  }
  out.truth.props = {"obst", "goal"};
  out.truth.num_states = c * c;
  out.truth.labels.resize(c * c);
  out.truth.labels[goal].push_back(1);
  for (int s = 0; s < c * c; ++s)
    if (!clear[s] && s != start && s != goal && unit(rng) < density)
      out.truth.labels[s].push_back(0);

  // Optimistic prior: obstacles believed unlikely everywhere, so the initial
  // most-probable map is obstacle-free; the goal location is known.
  out.prior.props = {"obst", "goal"};
  out.prior.b.assign(c * c, {0.1, 0.0});
  out.prior.b[start][0] = 0.0;
  out.prior.b[goal][0] = 0.0;
  out.prior.b[goal][1] = 1.0;
  out.prior.validate();

  // Reach the goal, never touch an obstacle.
  out.dfa.props = {"obst", "goal"};
  out.dfa.num_states = 3;
  out.dfa.init = 0;
  out.dfa.accepting = {0, 1, 0};
  out.dfa.edges.push_back({0, 2, {{0, true}}});
  out.dfa.edges.push_back({0, 1, {{1, true}}});
  out.dfa.edges.push_back({0, 0, {}});
  out.dfa.edges.push_back({1, 1, {}});
  out.dfa.edges.push_back({2, 2, {}});
  out.dfa.validate();

  out.obs.true_positive = 0.9;
  out.obs.false_positive = 0.1;
  out.obs.radius = 1.5;
  return out;
}

}  // namespace verisynth
