#include "verisynth/checker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "json.hpp"
#include "verisynth/lp.hpp"

namespace verisynth {

namespace {

// The iteration stops well below the 1e-9 tolerance the reported values are
// held to, so convergence slack never shows up in comparisons.
constexpr double kViSpanTol = 1e-12;
constexpr int kViMaxIters = 100000;
constexpr double kTol = 1e-9;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

double initial_mix(const Model& m, const std::vector<double>& v, int stride = 1,
                   int offset = 0) {
  double acc = 0.0;
  for (const auto& [s, p] : m.initial) acc += p * v[s * stride + offset];
  return acc;
}

// Shared row evaluation. Rows whose entries are all effectively points reduce
// to the plain ordered dot product — bitwise the same arithmetic the nominal
// iteration would do, so degenerate intervals equal nominal results exactly.
// Otherwise nature resolves the interval-budget polytope greedily.
double row_value(const std::vector<Transition>& ts,
                 const std::vector<double>& v,
                 const std::optional<NatureSense>& sense) {
  bool degenerate = true;
  for (const Transition& t : ts) {
    if (t.prob.is_affine())
      throw CheckError(
          "parametric entries present: instantiate the model first");
    if (t.prob.is_interval() && t.prob.hi != t.prob.lo) degenerate = false;
  }
  if (degenerate) {
    double acc = 0.0;
    for (const Transition& t : ts) acc += t.prob.lo * v[t.to];
    return acc;
  }
  if (!sense.has_value())
    throw CheckError("interval entries present (use robust_value)");

  double lo_sum = 0.0, acc = 0.0;
  for (const Transition& t : ts) {
    lo_sum += t.prob.lo;
    acc += t.prob.lo * v[t.to];
  }
  if (lo_sum > 1.0 + kTol)
    throw CheckError("interval row infeasible: lower bounds sum above 1");

  std::vector<int> order(ts.size());
  std::iota(order.begin(), order.end(), 0);
  const bool min = *sense == NatureSense::minimize;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = v[ts[a].to], vb = v[ts[b].to];
    if (va != vb) return min ? va < vb : va > vb;
    return a < b;
  });
  double remaining = 1.0 - lo_sum;
  for (int i : order) {
    if (remaining <= 0.0) break;
    const double take = std::min(ts[i].prob.hi - ts[i].prob.lo, remaining);
    acc += take * v[ts[i].to];
    remaining -= take;
  }
  if (remaining > kTol)
    throw CheckError("interval row infeasible: upper bounds sum below 1");
  return acc;
}

const Choice& choice_of(const Model& m, int s, int action) {
  for (const Choice& c : m.choices[s])
    if (c.action == action) return c;
  throw CheckError("policy plays a disabled action at " + m.state_name(s));
}

// Policy row with the uniform fallback for states left undefined (they must
// be unreachable; the uniform row only keeps the iteration total).
Distr effective_row(const Model& m, const Policy& policy, int s) {
  const Distr& row = policy.row_for_state(m, s);
  if (!row.empty()) return row;
  Distr uniform;
  const double p = 1.0 / static_cast<double>(m.choices[s].size());
  for (const Choice& c : m.choices[s]) uniform.push_back({c.action, p});
  return uniform;
}

struct ViQuery {
  Spec::Kind kind = Spec::Kind::reach;
  Spec::Optimize optimize = Spec::Optimize::maximize;
  std::optional<NatureSense> nature;
  const Policy* policy = nullptr;
};

// Jacobi-style value iteration from the zero vector (the least fixed point is
// the semantics of both reachability and total cost on dead-end-free models).
CheckResult vi_run(const Model& m, const std::vector<char>& fixed, ViQuery q) {
  std::vector<double> v(m.num_states, 0.0);
  if (q.kind == Spec::Kind::reach)
    for (int s = 0; s < m.num_states; ++s)
      if (fixed[s]) v[s] = 1.0;
  std::vector<double> vn = v;

  CheckResult res;
  int it = 0;
  double span = 0.0;
  for (; it < kViMaxIters; ++it) {
    span = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      if (fixed[s]) continue;
      double out;
      if (q.policy != nullptr) {
        out = 0.0;
        for (const auto& [a, pr] : effective_row(m, *q.policy, s)) {
          const Choice& c = choice_of(m, s, a);
          const double base = q.kind == Spec::Kind::cost ? c.cost : 0.0;
          out += pr * (base + row_value(c.transitions, v, q.nature));
        }
      } else {
        out = q.optimize == Spec::Optimize::maximize
                  ? -std::numeric_limits<double>::infinity()
                  : std::numeric_limits<double>::infinity();
        for (const Choice& c : m.choices[s]) {
          const double base = q.kind == Spec::Kind::cost ? c.cost : 0.0;
          const double qv = base + row_value(c.transitions, v, q.nature);
          out = q.optimize == Spec::Optimize::maximize ? std::max(out, qv)
                                                       : std::min(out, qv);
        }
      }
      vn[s] = out;
      span = std::max(span, std::abs(out - v[s]));
    }
    v.swap(vn);
    if (span < kViSpanTol) break;
  }
  if (span >= kViSpanTol)
    throw CheckError("value iteration did not converge within " +
                     std::to_string(kViMaxIters) + " sweeps");
  res.values = std::move(v);
  res.iterations = it + 1;
  res.initial_value = initial_mix(m, res.values);
  return res;
}

// Every state must reach the goal almost surely under every scheduler and
// every interval resolution (or under the fixed policy when one is given).
void require_no_dead_ends(const Model& m, const std::vector<char>& goal,
                          const Policy* policy) {
  ViQuery q;
  q.kind = Spec::Kind::reach;
  q.optimize = Spec::Optimize::minimize;
  q.nature = NatureSense::minimize;
  q.policy = policy;
  const CheckResult r = vi_run(m, goal, q);
  for (int s = 0; s < m.num_states; ++s)
    if (r.values[s] < 1.0 - kTol)
      throw CheckError("dead-end: " + m.state_name(s) +
                       " misses the goal set with positive probability");
}

}  // namespace

std::string CheckResult::to_json() const {
  nlohmann::json j;
  j["values"] = values;
  j["initial_value"] = initial_value;
  j["satisfied"] = satisfied;
  j["method"] = method;
  j["iterations"] = iterations;
  j["wall_time_ms"] = wall_time_ms;
  return j.dump(2);
}

Prob0Result prob0_and_reach_sets(const Model& m,
                                 const std::vector<char>& target) {
  if (std::find(target.begin(), target.end(), 1) == target.end())
    throw CheckError("empty target set");
  std::vector<std::vector<int>> preds(m.num_states);
  for (int s = 0; s < m.num_states; ++s)
    for (const Choice& c : m.choices[s])
      for (const Transition& t : c.transitions) preds[t.to].push_back(s);
  std::vector<char> can_reach(m.num_states, 0);
  std::deque<int> queue;
  for (int s = 0; s < m.num_states; ++s)
    if (target[s]) {
      can_reach[s] = 1;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int p : preds[s])
      if (!can_reach[p]) {
        can_reach[p] = 1;
        queue.push_back(p);
      }
  }
  Prob0Result out;
  out.target = target;
  out.no_reach.assign(m.num_states, 0);
  for (int s = 0; s < m.num_states; ++s) out.no_reach[s] = !can_reach[s];
  return out;
}

double worst_case_expectation(const std::vector<Transition>& entries,
                              const std::vector<double>& values,
                              NatureSense sense) {
  return row_value(entries, values, sense);
}

CheckResult max_reach_mdp(const Model& m, const std::vector<char>& target,
                          ReachMethod method) {
  Timer timer;
  CheckResult res;
  if (method == ReachMethod::vi) {
    ViQuery q;
    q.kind = Spec::Kind::reach;
    q.optimize = Spec::Optimize::maximize;
    res = vi_run(m, target, q);
    res.method = "vi";
  } else {
    LinearProgram lp;
    lp.sense = Sense::minimize;
    for (int s = 0; s < m.num_states; ++s) {
      const double lo = target[s] ? 1.0 : 0.0;
      const double hi = 1.0;
      lp.add_variable("p" + std::to_string(s), lo, hi);
      lp.objective.push_back({s, 1.0});
    }
    for (int s = 0; s < m.num_states; ++s) {
      if (target[s]) continue;
      for (const Choice& c : m.choices[s]) {
        std::map<int, double> coeff;
        coeff[s] += 1.0;
        for (const Transition& t : c.transitions) {
          if (!t.prob.is_point())
            throw CheckError("interval entries present (use robust_value)");
          coeff[t.to] -= t.prob.lo;
        }
        std::vector<std::pair<int, double>> row(coeff.begin(), coeff.end());
        lp.add_constraint(std::move(row), Relation::geq, 0.0);
      }
    }
    const LpResult sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal)
      throw CheckError("reachability LP unexpectedly " +
                       std::string(sol.status == LpStatus::infeasible
                                       ? "infeasible"
                                       : "unbounded"));
    res.values = sol.assignment;
    res.iterations = sol.pivots;
    res.initial_value = initial_mix(m, res.values);
    res.method = "lp-primal";
  }
  res.wall_time_ms = timer.ms();
  return res;
}

CheckResult expected_cost_mdp(const Model& m, const std::vector<char>& goal,
                              Spec::Optimize optimize, ReachMethod method) {
  Timer timer;
  require_no_dead_ends(m, goal, nullptr);
  CheckResult res;
  if (method == ReachMethod::vi) {
    ViQuery q;
    q.kind = Spec::Kind::cost;
    q.optimize = optimize;
    res = vi_run(m, goal, q);
    res.method = "vi";
  } else {
    // Sub-solutions bound the minimal cost from below (maximize them);
    // super-solutions bound the maximal cost from above (minimize them).
    const bool min_cost = optimize == Spec::Optimize::minimize;
    LinearProgram lp;
    lp.sense = min_cost ? Sense::maximize : Sense::minimize;
    for (int s = 0; s < m.num_states; ++s) {
      const double hi = goal[s] ? 0.0 : kInf;
      lp.add_variable("v" + std::to_string(s), 0.0, hi);
      lp.objective.push_back({s, 1.0});
    }
    for (int s = 0; s < m.num_states; ++s) {
      if (goal[s]) continue;
      for (const Choice& c : m.choices[s]) {
        std::map<int, double> coeff;
        coeff[s] += 1.0;
        for (const Transition& t : c.transitions) {
          if (!t.prob.is_point())
            throw CheckError("interval entries present (use robust_value)");
          coeff[t.to] -= t.prob.lo;
        }
        std::vector<std::pair<int, double>> row(coeff.begin(), coeff.end());
        lp.add_constraint(std::move(row),
                          min_cost ? Relation::leq : Relation::geq, c.cost);
      }
    }
    const LpResult sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal)
      throw CheckError("expected-cost LP unexpectedly not optimal");
    res.values = sol.assignment;
    res.iterations = sol.pivots;
    res.initial_value = initial_mix(m, res.values);
    res.method = "lp-primal";
  }
  res.wall_time_ms = timer.ms();
  return res;
}

DualSynthesis dual_lp_synthesize(const Model& m,
                                 const std::vector<char>& target, double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw CheckError("threshold beta must lie in [0, 1]");
  const Prob0Result sets = prob0_and_reach_sets(m, target);

  // Zero-probability states act as pure sinks: both their occupancy
  // variables and their conservation rows leave the program, otherwise mass
  // flowing into them could not be balanced.
  auto dropped = [&](int s) { return sets.no_reach[s] != 0; };

  LinearProgram lp;
  lp.sense = Sense::maximize;
  std::vector<std::vector<int>> var_of(m.num_states);  // per choice
  std::vector<int> tvar_of(m.num_states, -1);
  for (int s = 0; s < m.num_states; ++s) {
    if (dropped(s)) continue;
    if (target[s]) {
      tvar_of[s] = lp.add_variable("x" + std::to_string(s), 0.0, kInf);
    } else {
      for (size_t i = 0; i < m.choices[s].size(); ++i)
        var_of[s].push_back(lp.add_variable(
            "x" + std::to_string(s) + "_" + std::to_string(i), 0.0, kInf));
    }
  }

  std::vector<double> alpha(m.num_states, 0.0);
  for (const auto& [s, p] : m.initial) alpha[s] += p;

  // Conservation: outflow (or target mass) minus inflow equals the initial
  // injection at every kept state.
  std::vector<std::map<int, double>> rows(m.num_states);
  for (int s = 0; s < m.num_states; ++s) {
    if (dropped(s)) continue;
    if (target[s]) {
      rows[s][tvar_of[s]] += 1.0;
    } else {
      for (size_t i = 0; i < m.choices[s].size(); ++i)
        rows[s][var_of[s][i]] += 1.0;
    }
  }
  for (int s = 0; s < m.num_states; ++s) {
    if (dropped(s) || target[s]) continue;
    for (size_t i = 0; i < m.choices[s].size(); ++i) {
      const Choice& c = m.choices[s][i];
      for (const Transition& t : c.transitions) {
        if (!t.prob.is_point())
          throw CheckError("occupancy LP needs a point-probability model");
        if (dropped(t.to)) continue;  // leakage into the prob0 sink
        rows[t.to][var_of[s][i]] -= t.prob.lo;
      }
    }
  }
  for (int s = 0; s < m.num_states; ++s) {
    if (dropped(s)) continue;
    std::vector<std::pair<int, double>> row;
    for (const auto& [var, cf] : rows[s])
      if (cf != 0.0) row.push_back({var, cf});
    lp.add_constraint(std::move(row), Relation::eq, alpha[s]);
  }

  std::vector<std::pair<int, double>> thresh;
  for (int s = 0; s < m.num_states; ++s) {
    if (target[s] && !dropped(s)) {
      thresh.push_back({tvar_of[s], 1.0});
      lp.objective.push_back({tvar_of[s], 1.0});
    }
  }
  lp.add_constraint(std::move(thresh), Relation::geq, beta);

  const LpResult sol = solve_lp(lp);
  if (sol.status == LpStatus::infeasible)
    throw CheckError(
        "infeasible: the maximal reachability probability is below beta");
  if (sol.status != LpStatus::optimal)
    throw CheckError("occupancy LP unexpectedly unbounded");

  DualSynthesis out;
  out.objective = sol.objective;
  out.occupancy.assign(m.num_states, {});
  out.policy.kind = Policy::Kind::state_based;
  out.policy.rows.assign(m.num_states, {});
  for (int s = 0; s < m.num_states; ++s) {
    out.occupancy[s].assign(m.choices[s].size(), 0.0);
    double total = 0.0;
    if (!dropped(s) && !target[s]) {
      for (size_t i = 0; i < m.choices[s].size(); ++i) {
        out.occupancy[s][i] = sol.assignment[var_of[s][i]];
        total += out.occupancy[s][i];
      }
    }
    if (total > 1e-12) {
      for (size_t i = 0; i < m.choices[s].size(); ++i) {
        const double p = out.occupancy[s][i] / total;
        if (p > 0.0) out.policy.rows[s].push_back({m.choices[s][i].action, p});
      }
    } else {
      // Target, dropped, and unvisited states: any row works; use uniform.
      const double p = 1.0 / static_cast<double>(m.choices[s].size());
      for (const Choice& c : m.choices[s])
        out.policy.rows[s].push_back({c.action, p});
    }
  }
  return out;
}

CheckResult robust_value(const Model& m, const Spec& spec,
                         const Policy* policy) {
  Timer timer;
  const std::vector<char> mask = spec.target_mask(m);
  ViQuery q;
  q.kind = spec.kind;
  q.optimize = spec.optimize;
  q.nature =
      spec.nature_minimizes() ? NatureSense::minimize : NatureSense::maximize;
  q.policy = policy;
  if (spec.kind == Spec::Kind::cost)
    require_no_dead_ends(m, mask, policy);
  CheckResult res = vi_run(m, mask, q);
  res.method = m.has_intervals() ? "robust-vi" : "vi";
  res.satisfied = spec.satisfied_by(res.initial_value);
  res.wall_time_ms = timer.ms();
  return res;
}

std::vector<char> fsc_reachable(const Model& m, const Fsc& fsc) {
  const int k = fsc.num_nodes;
  std::vector<char> seen(m.num_states * k, 0);
  std::deque<std::pair<int, int>> queue;
  for (const auto& [s, p] : m.initial) {
    (void)p;
    if (!seen[s * k + fsc.initial_node]) {
      seen[s * k + fsc.initial_node] = 1;
      queue.push_back({s, fsc.initial_node});
    }
  }
  while (!queue.empty()) {
    const auto [s, n] = queue.front();
    queue.pop_front();
    const int z = m.observation[s];
    if (z < 0) throw CheckError("FSCs need deterministic observations");
    for (const auto& [a, pa] : fsc.action_map[n][z]) {
      if (pa <= 0.0) continue;
      const Choice& c = choice_of(m, s, a);
      for (const Transition& t : c.transitions)
        for (const auto& [n2, pn] : fsc.memory_update[n][z][a]) {
          if (pn <= 0.0) continue;
          if (!seen[t.to * k + n2]) {
            seen[t.to * k + n2] = 1;
            queue.push_back({t.to, n2});
          }
        }
    }
  }
  return seen;
}

CheckResult evaluate_fsc(const Model& m, const Fsc& fsc, const Spec& spec) {
  Timer timer;
  fsc.validate(m);
  const std::vector<char> mask = spec.target_mask(m);
  const int k = fsc.num_nodes;
  const int total = m.num_states * k;
  const std::vector<char> reach_pairs = fsc_reachable(m, fsc);
  for (int s = 0; s < m.num_states; ++s)
    for (int n = 0; n < k; ++n)
      if (reach_pairs[s * k + n] && !mask[s] &&
          fsc.action_map[n][m.observation[s]].empty())
        throw CheckError("FSC undefined on reachable pair (" +
                         m.state_name(s) + ", node " + std::to_string(n) +
                         ")");
  const std::optional<NatureSense> nature =
      spec.nature_minimizes() ? NatureSense::minimize : NatureSense::maximize;

  // Structured iteration value: v(s, n). The per-action interval row stays
  // rectangular: nature resolves P(s, a, .) against the mixed continuation
  // w(s') = sum_n' eta(n, z, a)(n') v(s', n').
  auto sweep = [&](Spec::Kind kind, const std::vector<char>& fixed,
                   std::optional<NatureSense> sense, std::vector<double>& v,
                   std::vector<double>& vn, std::vector<double>& w) {
    double span = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      if (fixed[s]) continue;
      const int z = m.observation[s];
      for (int n = 0; n < k; ++n) {
        double out = 0.0;
        for (const auto& [a, pa] : fsc.action_map[n][z]) {
          if (pa <= 0.0) continue;
          const Choice& c = choice_of(m, s, a);
          for (const Transition& t : c.transitions) {
            double mix = 0.0;
            for (const auto& [n2, pn] : fsc.memory_update[n][z][a])
              mix += pn * v[t.to * k + n2];
            w[t.to] = mix;
          }
          const double base = kind == Spec::Kind::cost ? c.cost : 0.0;
          out += pa * (base + row_value(c.transitions, w, sense));
        }
        const int idx = s * k + n;
        vn[idx] = out;
        span = std::max(span, std::abs(out - v[idx]));
      }
    }
    return span;
  };

  auto fixpoint = [&](Spec::Kind kind, const std::vector<char>& fixed,
                      std::optional<NatureSense> sense, int& iterations) {
    std::vector<double> v(total, 0.0), w(m.num_states, 0.0);
    if (kind == Spec::Kind::reach)
      for (int s = 0; s < m.num_states; ++s)
        if (fixed[s])
          for (int n = 0; n < k; ++n) v[s * k + n] = 1.0;
    std::vector<double> vn = v;
    int it = 0;
    double span = 0.0;
    for (; it < kViMaxIters; ++it) {
      span = sweep(kind, fixed, sense, v, vn, w);
      v.swap(vn);
      if (span < kViSpanTol) break;
    }
    if (span >= kViSpanTol)
      throw CheckError("FSC evaluation did not converge");
    iterations = it + 1;
    return v;
  };

  if (spec.kind == Spec::Kind::cost) {
    int unused = 0;
    const std::vector<double> reach_val =
        fixpoint(Spec::Kind::reach, mask, NatureSense::minimize, unused);
    for (int idx = 0; idx < total; ++idx)
      if (reach_pairs[idx] && reach_val[idx] < 1.0 - kTol)
        throw CheckError(
            "dead-end: the controller misses the goal set with positive "
            "probability");
  }

  CheckResult res;
  res.values = fixpoint(spec.kind, mask, nature, res.iterations);
  res.initial_value = 0.0;
  for (const auto& [s, p] : m.initial)
    res.initial_value += p * res.values[s * k + fsc.initial_node];
  res.method = m.has_intervals() ? "robust-vi" : "vi";
  res.satisfied = spec.satisfied_by(res.initial_value);
  res.wall_time_ms = timer.ms();
  return res;
}

CheckResult check(const Model& m, const Spec& spec) {
  if (m.has_params())
    throw CheckError(
        "parametric model: instantiate it or run parameter synthesis");
  return robust_value(m, spec, nullptr);
}

}  // namespace verisynth
