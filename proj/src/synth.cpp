#include "verisynth/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "verisynth/lp.hpp"
#include "verisynth/transforms.hpp"

namespace verisynth {

namespace {

constexpr double kTol = 1e-9;

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

// Nature's extreme point for one interval row at the given continuation
// values: same greedy (and the same tie order) the checker's row evaluation
// uses, but returning the chosen probabilities instead of the expectation.
std::vector<double> nature_vertex(const std::vector<Transition>& ts,
                                  const std::vector<double>& v,
                                  NatureSense sense) {
  std::vector<double> probs(ts.size());
  bool degenerate = true;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i].prob.is_affine())
      throw SynthError("parametric entries present where a vertex was asked");
    probs[i] = ts[i].prob.lo;
    if (ts[i].prob.is_interval() && ts[i].prob.hi != ts[i].prob.lo)
      degenerate = false;
  }
  if (degenerate) return probs;
  double lo_sum = 0.0;
  for (double p : probs) lo_sum += p;
  if (lo_sum > 1.0 + kTol)
    throw SynthError("interval row infeasible: lower bounds sum above 1");
  std::vector<int> order(ts.size());
  std::iota(order.begin(), order.end(), 0);
  const bool min = sense == NatureSense::minimize;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = v[ts[a].to], vb = v[ts[b].to];
    if (va != vb) return min ? va < vb : va > vb;
    return a < b;
  });
  double remaining = 1.0 - lo_sum;
  for (int i : order) {
    if (remaining <= 0.0) break;
    const double take = std::min(ts[i].prob.hi - ts[i].prob.lo, remaining);
    probs[i] += take;
    remaining -= take;
  }
  if (remaining > kTol)
    throw SynthError("interval row infeasible: upper bounds sum below 1");
  return probs;
}

}  // namespace

void validate_parametric(const Model& pm, double eps_graph) {
  pm.validate();
  for (int s = 0; s < pm.num_states; ++s)
    for (const Choice& c : pm.choices[s])
      for (const Transition& t : c.transitions) {
        if (t.prob.is_interval())
          throw SynthError("interval entries are not parameters; " +
                           pm.state_name(s) +
                           ": use scenario or robust analysis instead");
        if (!t.prob.is_affine()) continue;
        double worst = t.prob.constant;
        for (const auto& [pi, d] : t.prob.coeffs) {
          const auto& [lo, hi] = pm.param_ranges[pi];
          worst += std::min(d * lo, d * hi);
        }
        if (worst < eps_graph - 1e-12)
          throw SynthError(
              pm.state_name(s) + ": entry can drop below " +
              std::to_string(eps_graph) +
              " inside the parameter box (ranges are not graph-preserving)");
      }
}

Model instantiate(const Model& pm,
                  const std::map<std::string, double>& values) {
  Model out = pm;
  std::vector<double> vals(pm.params.size());
  for (size_t i = 0; i < pm.params.size(); ++i) {
    const auto it = values.find(pm.params[i]);
    if (it == values.end())
      throw SynthError("no value for parameter '" + pm.params[i] + "'");
    const auto& [lo, hi] = pm.param_ranges[i];
    if (it->second < lo - kTol || it->second > hi + kTol)
      throw SynthError("parameter '" + pm.params[i] + "' = " +
                       std::to_string(it->second) + " outside its range");
    vals[i] = clamp(it->second, lo, hi);
  }
  for (auto& choices : out.choices)
    for (Choice& c : choices)
      for (Transition& t : c.transitions)
        if (t.prob.is_affine()) t.prob = ProbEntry::point(t.prob.eval(vals));
  out.params.clear();
  out.param_ranges.clear();
  out.validate();
  return out;
}

std::string SynthReport::status_str() const {
  switch (status) {
    case Status::satisfied:
      return "satisfied";
    case Status::no_improvement:
      return "no-improvement";
    default:
      return "max-iters";
  }
}

std::string SynthReport::to_json() const {
  nlohmann::json j;
  j["status"] = status_str();
  j["certified_value"] = certified_value;
  j["iterations"] = iterations;
  j["final_delta"] = final_delta;
  if (!parameters.empty()) j["parameters"] = parameters;
  j["artifact"] =
      fsc.has_value() ? "fsc" : (!parameters.empty() ? "parameters" : "none");
  nlohmann::json steps_json = nlohmann::json::array();
  for (const SynthStep& st : steps)
    steps_json.push_back({{"iteration", st.iteration},
                          {"value", st.value},
                          {"delta", st.delta},
                          {"accepted", st.accepted}});
  j["steps"] = steps_json;
  return j.dump(2);
}

std::string SynthReport::trace_csv() const {
  std::ostringstream out;
  out << "iteration,value,delta,accepted\n";
  out.precision(17);
  for (const SynthStep& st : steps)
    out << st.iteration << ',' << st.value << ',' << st.delta << ','
        << (st.accepted ? 1 : 0) << '\n';
  return out.str();
}

SynthReport scp_param_synthesis(const Model& pm, const Spec& spec,
                                const ScpConfig& cfg) {
  cfg.validate();
  if (spec.kind != Spec::Kind::reach)
    throw SynthError(
        "parameter synthesis supports reachability objectives only");

  if (pm.num_params() == 0) {
    const CheckResult r = check(pm, spec);
    SynthReport rep;
    rep.status = r.satisfied ? SynthReport::Status::satisfied
                             : SynthReport::Status::no_improvement;
    rep.certified_value = r.initial_value;
    rep.final_delta = cfg.delta0;
    return rep;
  }

  validate_parametric(pm, cfg.eps_graph);
  bool has_choices = false;
  for (int s = 0; s < pm.num_states; ++s)
    if (pm.choices[s].size() > 1) has_choices = true;
  // Rows bound the value from above for maximization and from below for the
  // safety direction; with real action choices only the safety bound
  // quantifies over all policies, so the other direction is rejected.
  const bool upper = spec.direction == Spec::Direction::at_least;
  if (has_choices && upper)
    throw SynthError(
        "models with action choices support only the safety direction "
        "(reach <= lambda); joint policy+parameter maximization is the "
        "controller-synthesis engine's job");

  const std::vector<char> mask = spec.target_mask(pm);
  const Prob0Result sets = prob0_and_reach_sets(pm, mask);
  auto fixed_value = [&](int s) -> std::optional<double> {
    if (mask[s]) return 1.0;
    if (sets.no_reach[s]) return 0.0;
    return std::nullopt;
  };

  std::map<std::string, double> vhat;
  for (size_t i = 0; i < pm.params.size(); ++i)
    vhat[pm.params[i]] =
        0.5 * (pm.param_ranges[i].first + pm.param_ranges[i].second);

  auto certify = [&](const std::map<std::string, double>& vals) {
    return check(instantiate(pm, vals), spec);
  };

  CheckResult cur = certify(vhat);
  double best = cur.initial_value;
  std::vector<double> phat = cur.values;

  SynthReport rep;
  rep.parameters = vhat;
  rep.certified_value = best;
  rep.final_delta = cfg.delta0;
  if (spec.satisfied_by(best)) {
    rep.status = SynthReport::Status::satisfied;
    return rep;
  }

  double delta = cfg.delta0;
  int iter = 0;
  while (iter < cfg.max_iters && delta >= cfg.omega) {
    ++iter;
    LinearProgram lp;
    lp.sense = upper ? Sense::maximize : Sense::minimize;

    std::vector<int> pvar(pm.num_states, -1), kvar(pm.num_states, -1);
    for (int s = 0; s < pm.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      const Bounds b =
          trust_region_bounds(std::max(phat[s], 1e-9), delta, 0.0, 1.0);
      pvar[s] = lp.add_variable("p" + std::to_string(s), b.lo, b.hi);
    }
    std::vector<int> yvar(pm.params.size(), -1);
    for (size_t i = 0; i < pm.params.size(); ++i) {
      const auto& [lo, hi] = pm.param_ranges[i];
      const Bounds b = trust_region_bounds(
          std::max(vhat[pm.params[i]], 1e-9), delta, lo, hi);
      yvar[i] = lp.add_variable(pm.params[i], b.lo, b.hi);
    }
    for (int s = 0; s < pm.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      kvar[s] = lp.add_variable("k" + std::to_string(s), 0.0, kInf);
      lp.objective.push_back({kvar[s], upper ? -cfg.tau : cfg.tau});
    }
    for (const auto& [s, p] : pm.initial)
      if (pvar[s] >= 0) lp.objective.push_back({pvar[s], p});

    for (int s = 0; s < pm.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      for (const Choice& c : pm.choices[s]) {
        std::map<int, double> coeff;
        double rhs = 0.0;  // constant part of the linearized right-hand side
        for (const Transition& t : c.transitions) {
          const std::optional<double> fv = fixed_value(t.to);
          if (t.prob.is_point()) {
            if (fv.has_value())
              rhs += t.prob.lo * *fv;
            else
              coeff[pvar[t.to]] += t.prob.lo;
            continue;
          }
          if (fv.has_value()) {
            // Fixed continuation: the affine entry contributes exactly.
            if (*fv != 0.0) {
              rhs += t.prob.constant * *fv;
              for (const auto& [pi, d] : t.prob.coeffs)
                coeff[yvar[pi]] += d * *fv;
            }
            continue;
          }
          coeff[pvar[t.to]] += t.prob.constant;
          for (const auto& [pi, d] : t.prob.coeffs) {
            const AffineApprox a = linearize_bilinear(
                0.5 * d, 0.0, vhat[pm.params[pi]], phat[t.to]);
            rhs += a.constant;
            coeff[yvar[pi]] += a.coeff_y;
            coeff[pvar[t.to]] += a.coeff_z;
          }
        }
        // upper:  p_s <= RHS(p, y) + k_s;   lower:  p_s >= RHS(p, y) - k_s,
        // written as  p_s - coeff.vars -/+ k_s  <=/>=  rhs.
        std::vector<std::pair<int, double>> row;
        row.push_back({pvar[s], 1.0});
        for (const auto& [var, cf] : coeff)
          if (var == pvar[s])
            row[0].second -= cf;
          else
            row.push_back({var, -cf});
        row.push_back({kvar[s], upper ? -1.0 : 1.0});
        lp.add_constraint(std::move(row),
                          upper ? Relation::leq : Relation::geq, rhs);
      }
    }

    const LpResult sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal)
      throw SynthError("internal: linearized LP not optimal");

    std::map<std::string, double> cand = vhat;
    for (size_t i = 0; i < pm.params.size(); ++i)
      cand[pm.params[i]] = clamp(sol.assignment[yvar[i]],
                                 pm.param_ranges[i].first,
                                 pm.param_ranges[i].second);

    const CheckResult res = certify(cand);
    const ScpStep st =
        scp_step(res.initial_value, best, delta, cfg.gamma, upper);
    rep.steps.push_back({iter, res.initial_value, delta, st.accept});
    delta = st.delta;
    if (st.accept) {
      vhat = cand;
      best = res.initial_value;
      phat = res.values;
      rep.parameters = vhat;
      rep.certified_value = best;
      if (spec.satisfied_by(best)) {
        rep.status = SynthReport::Status::satisfied;
        rep.iterations = iter;
        rep.final_delta = delta;
        return rep;
      }
    }
  }
  rep.iterations = iter;
  rep.final_delta = delta;
  rep.status = delta < cfg.omega ? SynthReport::Status::no_improvement
                                 : SynthReport::Status::max_iters;
  return rep;
}

namespace {

// Decision observations of a simple model are exactly those with two action
// slots; everything else is forced. sig holds the two slot probabilities.
struct SigmaState {
  std::vector<std::array<double, 2>> rows;  // per observation
  std::vector<char> is_choice;              // per observation
};

Policy sigma_to_policy(const SimpleForm& sf, const SigmaState& sig) {
  Policy pol;
  pol.kind = Policy::Kind::observation_based;
  pol.rows.resize(sf.slot_actions.size());
  for (size_t z = 0; z < sf.slot_actions.size(); ++z) {
    const std::vector<int>& slots = sf.slot_actions[z];
    if (slots.empty()) continue;
    if (slots.size() == 1) {
      pol.rows[z] = {{slots[0], 1.0}};
    } else {
      pol.rows[z] = {{slots[0], sig.rows[z][0]}, {slots[1], sig.rows[z][1]}};
    }
  }
  return pol;
}

void clamp_sigma_row(std::array<double, 2>& row, double eps_pol) {
  row[0] = clamp(row[0], eps_pol, 1.0 - eps_pol);
  row[1] = clamp(row[1], eps_pol, 1.0 - eps_pol);
  const double total = row[0] + row[1];
  row[0] /= total;
  row[1] /= total;
}

}  // namespace

SynthReport robust_fsc_synthesis(const Model& model, int k, const Spec& spec,
                                 const ScpConfig& cfg, const Fsc* warm_start) {
  cfg.validate();
  if (k < 1) throw SynthError("memory bound k must be >= 1");
  if (model.kind != Model::Kind::pomdp)
    throw SynthError("controller synthesis expects a (u)POMDP");
  if (model.has_params())
    throw SynthError("instantiate parameters before controller synthesis");
  if (spec.kind != Spec::Kind::reach)
    throw SynthError(
        "controller synthesis supports reachability objectives only");
  model.validate();
  if (warm_start != nullptr) {
    warm_start->validate(model);
    if (warm_start->num_nodes != k)
      throw SynthError("warm-start controller has the wrong node count");
  }

  const FscProductInfo info = fsc_product_info(model, k);
  const SimpleForm sf = to_simple_info(info.model);
  const Model& S = sf.model;
  for (int s = 0; s < S.num_states; ++s) {
    if (S.choices[s].size() > 2)
      throw SynthError("internal: simple-form state kept >2 actions");
    if (S.choices[s].size() == 2)
      for (const Choice& c : S.choices[s])
        if (c.transitions.size() != 1 || !c.transitions[0].prob.is_point() ||
            std::abs(c.transitions[0].prob.lo - 1.0) > kTol)
          throw SynthError("internal: simple-form choice row not Dirac");
  }

  // Targets are named on the original model; lift the mask through the
  // product (aux states of the simple form are never targets) and restate it
  // as explicit state tokens so every engine below sees the same set.
  const std::vector<char> base_mask = spec.target_mask(model);
  std::vector<char> mask = info.lift_mask(base_mask);
  mask.resize(S.num_states, 0);
  Spec spec_s = spec;
  spec_s.targets.clear();
  for (int s = 0; s < S.num_states; ++s)
    if (mask[s]) spec_s.targets.push_back("s" + std::to_string(s));
  if (spec_s.targets.empty()) throw SynthError("empty target set");

  const Prob0Result sets = prob0_and_reach_sets(S, mask);
  auto fixed_value = [&](int s) -> std::optional<double> {
    if (mask[s]) return 1.0;
    if (sets.no_reach[s]) return 0.0;
    return std::nullopt;
  };
  const bool maximize = spec.maximize();
  const NatureSense nature = spec.nature_minimizes() ? NatureSense::minimize
                                                     : NatureSense::maximize;

  // Initial decision probabilities: uniform, or decomposed from the
  // warm-start controller along the simple form's slot paths.
  SigmaState sig;
  sig.rows.assign(S.num_obs(), {0.5, 0.5});
  sig.is_choice.assign(S.num_obs(), 0);
  for (size_t z = 0; z < sf.slot_actions.size(); ++z)
    if (sf.slot_actions[z].size() == 2) sig.is_choice[z] = 1;
  if (warm_start != nullptr) {
    // Slot weights at each base observation, then conditional branch masses
    // at every decision observation along the paths.
    std::vector<std::map<int, double>> mass(S.num_obs());
    for (int z = 0; z < info.base_obs; ++z)
      for (int n = 0; n < k; ++n) {
        const int zp = info.product_obs(z, n);
        if (zp >= static_cast<int>(sf.paths.size())) continue;
        for (size_t slot = 0; slot < sf.paths[zp].size(); ++slot) {
          // Product action index behind this slot.
          const int pa = sf.slot_actions[zp][slot];
          const int a = pa / k, n2 = pa % k;
          double w = 0.0;
          for (const auto& [aa, p] : warm_start->action_map[n][z])
            if (aa == a)
              for (const auto& [nn, q] : warm_start->memory_update[n][z][a])
                if (nn == n2) w = p * q;
          for (const auto& [obs, act] : sf.paths[zp][slot])
            if (sig.is_choice[obs]) mass[obs][act] += w;
        }
      }
    for (int z = 0; z < S.num_obs(); ++z) {
      if (!sig.is_choice[z] || mass[z].empty()) continue;
      const double m0 = mass[z].count(sf.slot_actions[z][0])
                            ? mass[z][sf.slot_actions[z][0]]
                            : 0.0;
      const double m1 = mass[z].count(sf.slot_actions[z][1])
                            ? mass[z][sf.slot_actions[z][1]]
                            : 0.0;
      if (m0 + m1 > 1e-15) sig.rows[z] = {m0 / (m0 + m1), m1 / (m0 + m1)};
      clamp_sigma_row(sig.rows[z], cfg.eps_pol);
    }
  }
  for (int z = 0; z < S.num_obs(); ++z)
    if (sig.is_choice[z]) clamp_sigma_row(sig.rows[z], cfg.eps_pol);

  // Certify a candidate: fold through the simple form and the product, then
  // evaluate the resulting controller on the original model. The simple-model
  // fixpoint under the same candidate provides the expansion values.
  struct Certified {
    double value = 0.0;
    std::vector<double> rhat;
    Fsc fsc;
    Policy product_policy;
  };
  auto certify = [&](const SigmaState& cand) {
    Certified c;
    const Policy simple_pol = sigma_to_policy(sf, cand);
    c.product_policy = fold_simple_policy(sf, simple_pol);
    c.fsc = info.fold_back(c.product_policy);
    c.value = evaluate_fsc(model, c.fsc, spec).initial_value;
    c.rhat = robust_value(S, spec_s, &simple_pol).values;
    return c;
  };

  Certified cur = certify(sig);
  double best = cur.value;

  SynthReport rep;
  rep.fsc = cur.fsc;
  rep.policy = cur.product_policy;
  rep.certified_value = best;
  rep.final_delta = cfg.delta0;
  if (spec.satisfied_by(best)) {
    rep.status = SynthReport::Status::satisfied;
    return rep;
  }

  double delta = cfg.delta0;
  int iter = 0;
  while (iter < cfg.max_iters && delta >= cfg.omega) {
    ++iter;
    LinearProgram lp;
    lp.sense = maximize ? Sense::maximize : Sense::minimize;

    std::vector<int> rvar(S.num_states, -1), kvar(S.num_states, -1);
    for (int s = 0; s < S.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      const Bounds b =
          trust_region_bounds(std::max(cur.rhat[s], 1e-9), delta, 0.0, 1.0);
      rvar[s] = lp.add_variable("r" + std::to_string(s), b.lo, b.hi);
    }
    std::vector<std::array<int, 2>> svar(S.num_obs(), {-1, -1});
    for (int z = 0; z < S.num_obs(); ++z) {
      if (!sig.is_choice[z]) continue;
      for (int j = 0; j < 2; ++j) {
        const Bounds b = trust_region_bounds(sig.rows[z][j], delta,
                                             cfg.eps_pol, 1.0 - cfg.eps_pol);
        svar[z][j] = lp.add_variable(
            "sig" + std::to_string(z) + "_" + std::to_string(j), b.lo, b.hi);
      }
      lp.add_constraint({{svar[z][0], 1.0}, {svar[z][1], 1.0}}, Relation::eq,
                        1.0);
    }
    for (int s = 0; s < S.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      kvar[s] = lp.add_variable("k" + std::to_string(s), 0.0, kInf);
      lp.objective.push_back({kvar[s], maximize ? -cfg.tau : cfg.tau});
    }
    for (const auto& [s, p] : S.initial)
      if (rvar[s] >= 0) lp.objective.push_back({rvar[s], p});

    for (int s = 0; s < S.num_states; ++s) {
      if (fixed_value(s).has_value()) continue;
      std::map<int, double> coeff;
      double rhs = 0.0;
      if (S.choices[s].size() == 2) {
        const int z = S.observation[s];
        for (int j = 0; j < 2; ++j) {
          // Slot order is the sorted action order shared per observation.
          const int act = sf.slot_actions[z][j];
          const Choice* ch = nullptr;
          for (const Choice& c : S.choices[s])
            if (c.action == act) ch = &c;
          if (ch == nullptr)
            throw SynthError("internal: slot action missing at state");
          const int to = ch->transitions[0].to;
          const std::optional<double> fv = fixed_value(to);
          if (fv.has_value()) {
            coeff[svar[z][j]] += *fv;  // sigma * constant continuation
          } else {
            const AffineApprox a = linearize_bilinear(
                0.5, 0.0, sig.rows[z][j], std::max(cur.rhat[to], 0.0));
            rhs += a.constant;
            coeff[svar[z][j]] += a.coeff_y;
            coeff[rvar[to]] += a.coeff_z;
          }
        }
      } else {
        // Single action: nature's current worst-case vertex as a cut.
        const Choice& c = S.choices[s][0];
        const std::vector<double> vertex =
            nature_vertex(c.transitions, cur.rhat, nature);
        for (size_t i = 0; i < c.transitions.size(); ++i) {
          const int to = c.transitions[i].to;
          const std::optional<double> fv = fixed_value(to);
          if (fv.has_value())
            rhs += vertex[i] * *fv;
          else
            coeff[rvar[to]] += vertex[i];
        }
      }
      std::vector<std::pair<int, double>> row;
      row.push_back({rvar[s], 1.0});
      for (const auto& [var, cf] : coeff)
        if (var == rvar[s])
          row[0].second -= cf;
        else
          row.push_back({var, -cf});
      row.push_back({kvar[s], maximize ? -1.0 : 1.0});
      lp.add_constraint(std::move(row),
                        maximize ? Relation::leq : Relation::geq, rhs);
    }

    const LpResult sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal)
      throw SynthError("internal: linearized LP not optimal");

    SigmaState cand = sig;
    for (int z = 0; z < S.num_obs(); ++z) {
      if (!sig.is_choice[z]) continue;
      cand.rows[z] = {sol.assignment[svar[z][0]], sol.assignment[svar[z][1]]};
      clamp_sigma_row(cand.rows[z], cfg.eps_pol);
    }

    const Certified res = certify(cand);
    const ScpStep st = scp_step(res.value, best, delta, cfg.gamma, maximize);
    rep.steps.push_back({iter, res.value, delta, st.accept});
    delta = st.delta;
    if (st.accept) {
      sig = cand;
      cur = res;
      best = res.value;
      rep.fsc = cur.fsc;
      rep.policy = cur.product_policy;
      rep.certified_value = best;
      if (spec.satisfied_by(best)) {
        rep.status = SynthReport::Status::satisfied;
        rep.iterations = iter;
        rep.final_delta = delta;
        return rep;
      }
    }
  }
  rep.iterations = iter;
  rep.final_delta = delta;
  rep.status = delta < cfg.omega ? SynthReport::Status::no_improvement
                                 : SynthReport::Status::max_iters;
  return rep;
}

}  // namespace verisynth
