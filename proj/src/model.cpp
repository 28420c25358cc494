#include "verisynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace verisynth {

namespace {

constexpr double kProbTol = 1e-9;

std::string row_label(const Model& m, int s, const Choice& c) {
  std::string out = m.state_name(s);
  if (c.action >= 0 && c.action < m.num_actions())
    out += "/" + m.action_names[c.action];
  return out;
}

void check_distr(const Distr& d, int limit, const std::string& what) {
  double sum = 0.0;
  for (const auto& [i, p] : d) {
    if (i < 0 || i >= limit)
      throw ModelError(what + ": index " + std::to_string(i) + " out of range");
    if (!(p > 0.0) || p > 1.0 + kProbTol)
      throw ModelError(what + ": probability " + std::to_string(p) +
                       " outside (0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol)
    throw ModelError(what + ": probabilities sum to " + std::to_string(sum) +
                     ", expected 1");
}

}  // namespace

ProbEntry ProbEntry::point(double p) {
  ProbEntry e;
  e.kind = Kind::point;
  e.lo = e.hi = p;
  return e;
}

ProbEntry ProbEntry::interval(double lo, double hi) {
  ProbEntry e;
  e.kind = Kind::interval;
  e.lo = lo;
  e.hi = hi;
  return e;
}

ProbEntry ProbEntry::affine(double constant,
                            std::vector<std::pair<int, double>> coeffs) {
  ProbEntry e;
  e.kind = Kind::affine;
  e.constant = constant;
  e.coeffs = std::move(coeffs);
  return e;
}

double ProbEntry::value() const {
  if (!is_point()) throw ModelError("entry is not a point probability");
  return lo;
}

double ProbEntry::eval(const std::vector<double>& params) const {
  if (is_point()) return lo;
  if (is_interval())
    throw ModelError("cannot evaluate an interval entry at a parameter point");
  double v = constant;
  for (const auto& [j, c] : coeffs) {
    if (j < 0 || j >= static_cast<int>(params.size()))
      throw ModelError("affine entry references unknown parameter index " +
                       std::to_string(j));
    v += c * params[j];
  }
  return v;
}

bool Model::has_intervals() const {
  for (const auto& state_choices : choices)
    for (const auto& c : state_choices)
      for (const auto& t : c.transitions)
        if (t.prob.is_interval()) return true;
  return false;
}

int Model::initial_state() const {
  if (initial.size() != 1 || std::abs(initial[0].second - 1.0) > kProbTol)
    throw ModelError("model has a spread initial distribution, not a single "
                     "initial state");
  return initial[0].first;
}

int Model::action_index(const std::string& name) const {
  auto it = std::find(action_names.begin(), action_names.end(), name);
  return it == action_names.end()
             ? -1
             : static_cast<int>(it - action_names.begin());
}

int Model::obs_index(const std::string& name) const {
  auto it = std::find(obs_names.begin(), obs_names.end(), name);
  return it == obs_names.end() ? -1 : static_cast<int>(it - obs_names.begin());
}

int Model::prop_index(const std::string& name) const {
  auto it = std::find(prop_names.begin(), prop_names.end(), name);
  return it == prop_names.end() ? -1
                                : static_cast<int>(it - prop_names.begin());
}

bool Model::has_label(int s, int prop) const {
  if (s < 0 || s >= static_cast<int>(labels.size())) return false;
  const auto& ls = labels[s];
  return std::find(ls.begin(), ls.end(), prop) != ls.end();
}

std::vector<int> Model::actions_at(int s) const {
  std::vector<int> out;
  for (const auto& c : choices[s]) out.push_back(c.action);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Model::actions_at_obs(int z) const {
  for (int s = 0; s < num_states; ++s)
    if (!observation.empty() && observation[s] == z) return actions_at(s);
  throw ModelError("no state carries observation index " + std::to_string(z));
}

void Model::validate() const {
  if (num_states < 1) throw ModelError("model must have at least one state");
  if (static_cast<int>(choices.size()) != num_states)
    throw ModelError("choice rows do not cover every state");
  if (initial.empty()) throw ModelError("missing initial distribution");
  check_distr(initial, num_states, "initial distribution");

  for (int s = 0; s < num_states; ++s) {
    if (choices[s].empty())
      throw ModelError("state " + state_name(s) + " has no enabled action");
    if (kind == Kind::mc && choices[s].size() != 1)
      throw ModelError("Markov chain state " + state_name(s) +
                       " has more than one row");
    std::vector<int> seen_actions;
    for (const auto& c : choices[s]) {
      const std::string where = "row " + row_label(*this, s, c);
      if (kind == Kind::mc) {
        if (c.action != -1)
          throw ModelError(where + ": Markov chain rows carry no action");
      } else if (c.action < 0 || c.action >= num_actions()) {
        throw ModelError(where + ": action index out of range");
      }
      if (std::find(seen_actions.begin(), seen_actions.end(), c.action) !=
          seen_actions.end())
        throw ModelError(where + ": duplicate action row");
      seen_actions.push_back(c.action);
      if (c.cost < 0.0)
        throw ModelError(where + ": negative cost");
      if (c.transitions.empty())
        throw ModelError(where + ": empty transition row");

      bool any_interval = false, any_affine = false;
      double lo_sum = 0.0, hi_sum = 0.0, const_sum = 0.0;
      std::map<int, double> coeff_sum;
      std::vector<int> seen_dest;
      for (const auto& t : c.transitions) {
        if (t.to < 0 || t.to >= num_states)
          throw ModelError(where + ": successor out of range");
        if (std::find(seen_dest.begin(), seen_dest.end(), t.to) !=
            seen_dest.end())
          throw ModelError(where + ": duplicate successor " + state_name(t.to));
        seen_dest.push_back(t.to);
        const ProbEntry& e = t.prob;
        switch (e.kind) {
          case ProbEntry::Kind::point:
            if (!(e.lo > 0.0) || e.lo > 1.0 + kProbTol)
              throw ModelError(where + ": point probability " +
                               std::to_string(e.lo) + " outside (0, 1]");
            lo_sum += e.lo;
            hi_sum += e.lo;
            const_sum += e.lo;
            break;
          case ProbEntry::Kind::interval:
            any_interval = true;
            if (!(e.lo > 0.0))
              throw ModelError(where + ": interval with zero lower bound (all "
                                       "intervals must have lo > 0)");
            if (e.lo > e.hi || e.hi > 1.0 + kProbTol)
              throw ModelError(where + ": interval bounds must satisfy 0 < lo "
                                       "<= hi <= 1");
            lo_sum += e.lo;
            hi_sum += e.hi;
            break;
          case ProbEntry::Kind::affine:
            any_affine = true;
            const_sum += e.constant;
            for (const auto& [j, cf] : e.coeffs) {
              if (j < 0 || j >= num_params())
                throw ModelError(where +
                                 ": affine entry references unknown parameter");
              coeff_sum[j] += cf;
            }
            break;
        }
      }
      if (any_interval && any_affine)
        throw ModelError(where +
                         ": row mixes interval and parametric entries");
      if (any_interval) {
        if (lo_sum > 1.0 + kProbTol || hi_sum < 1.0 - kProbTol)
          throw ModelError(where + ": interval row budget violated (need "
                                   "sum(lo) <= 1 <= sum(hi))");
      } else if (any_affine) {
        if (std::abs(const_sum - 1.0) > kProbTol)
          throw ModelError(where + ": affine row constants must sum to 1");
        for (const auto& [j, cs] : coeff_sum)
          if (std::abs(cs) > kProbTol)
            throw ModelError(where + ": affine row coefficients of parameter " +
                             params[j] + " must sum to 0");
      } else {
        if (std::abs(lo_sum - 1.0) > kProbTol)
          throw ModelError(where + ": probabilities sum to " +
                           std::to_string(lo_sum) + ", expected 1");
      }
    }
  }

  if (kind == Kind::pomdp) {
    if (static_cast<int>(observation.size()) != num_states)
      throw ModelError("POMDP must define an observation for every state");
    for (int s = 0; s < num_states; ++s) {
      const int z = observation[s];
      if (z == -1) {
        if (s >= static_cast<int>(obs_dist.size()) || obs_dist[s].empty())
          throw ModelError("state " + state_name(s) +
                           " has neither a deterministic nor a stochastic "
                           "observation");
        check_distr(obs_dist[s], num_obs(),
                    "observation distribution of " + state_name(s));
      } else if (z < 0 || z >= num_obs()) {
        throw ModelError("state " + state_name(s) +
                         " has an out-of-range observation");
      }
    }
    // Observation-based policies need identical action sets across states
    // sharing a deterministic observation.
    std::map<int, std::vector<int>> per_obs;
    for (int s = 0; s < num_states; ++s) {
      if (observation[s] < 0) continue;
      auto acts = actions_at(s);
      auto [it, inserted] = per_obs.emplace(observation[s], acts);
      if (!inserted && it->second != acts)
        throw ModelError("states sharing observation " +
                         obs_names[observation[s]] +
                         " enable different action sets");
    }
  } else if (!observation.empty()) {
    throw ModelError("only POMDPs carry observations");
  }

  if (!labels.empty() && static_cast<int>(labels.size()) != num_states)
    throw ModelError("label rows do not cover every state");
  for (int s = 0; s < static_cast<int>(labels.size()); ++s)
    for (int p : labels[s])
      if (p < 0 || p >= static_cast<int>(prop_names.size()))
        throw ModelError("state " + state_name(s) +
                         " carries an unknown proposition index");

  if (params.size() != param_ranges.size())
    throw ModelError("every parameter needs a range");
  for (int j = 0; j < num_params(); ++j)
    if (!(param_ranges[j].first < param_ranges[j].second))
      throw ModelError("parameter " + params[j] + " has an empty range");

  if (!coords.empty() && static_cast<int>(coords.size()) != num_states)
    throw ModelError("coordinate rows do not cover every state");
}

Policy Policy::deterministic(Kind kind, const std::vector<int>& actions) {
  Policy p;
  p.kind = kind;
  p.rows.reserve(actions.size());
  for (int a : actions) p.rows.push_back({{a, 1.0}});
  return p;
}

bool Policy::is_deterministic() const {
  for (const auto& row : rows)
    if (row.size() != 1 || std::abs(row[0].second - 1.0) > kProbTol)
      return false;
  return true;
}

const Distr& Policy::row_for_state(const Model& m, int s) const {
  if (kind == Kind::state_based) {
    if (s < 0 || s >= static_cast<int>(rows.size()))
      throw ModelError("policy undefined on state " + m.state_name(s));
    return rows[s];
  }
  if (m.kind != Model::Kind::pomdp)
    throw ModelError("observation-based policy applied to a model without "
                     "observations");
  const int z = m.observation[s];
  if (z < 0)
    throw ModelError("observation-based policy needs deterministic "
                     "observations (run expand_observations first)");
  if (z >= static_cast<int>(rows.size()))
    throw ModelError("policy undefined on observation " + m.obs_names[z]);
  return rows[z];
}

double Policy::prob(const Model& m, int s, int action) const {
  for (const auto& [a, p] : row_for_state(m, s))
    if (a == action) return p;
  return 0.0;
}

void Policy::validate(const Model& m) const {
  const int want = kind == Kind::state_based ? m.num_states : m.num_obs();
  if (static_cast<int>(rows.size()) != want)
    throw ModelError("policy row count does not match the model");
  for (int i = 0; i < want; ++i) {
    check_distr(rows[i], m.num_actions(),
                "policy row " + std::to_string(i));
    const std::vector<int> avail = kind == Kind::state_based
                                       ? m.actions_at(i)
                                       : m.actions_at_obs(i);
    for (const auto& [a, p] : rows[i])
      if (std::find(avail.begin(), avail.end(), a) == avail.end())
        throw ModelError("policy row " + std::to_string(i) +
                         " uses an action that is not enabled");
  }
}

Fsc Fsc::uniform(const Model& m, int k) {
  if (k < 1) throw ModelError("an FSC needs at least one memory node");
  Fsc f;
  f.num_nodes = k;
  f.action_map.assign(k, std::vector<Distr>(m.num_obs()));
  f.memory_update.assign(
      k, std::vector<std::vector<Distr>>(
             m.num_obs(), std::vector<Distr>(m.num_actions())));
  for (int z = 0; z < m.num_obs(); ++z) {
    const auto acts = m.actions_at_obs(z);
    const double pa = 1.0 / static_cast<double>(acts.size());
    const double pn = 1.0 / static_cast<double>(k);
    for (int n = 0; n < k; ++n) {
      for (int a : acts) {
        f.action_map[n][z].push_back({a, pa});
        for (int n2 = 0; n2 < k; ++n2)
          f.memory_update[n][z][a].push_back({n2, pn});
      }
    }
  }
  return f;
}

Fsc Fsc::from_policy(const Model& m, const Policy& p) {
  if (p.kind != Policy::Kind::observation_based)
    throw ModelError("only observation-based policies lift to FSCs");
  Fsc f;
  f.num_nodes = 1;
  f.action_map.assign(1, std::vector<Distr>(m.num_obs()));
  f.memory_update.assign(
      1, std::vector<std::vector<Distr>>(
             m.num_obs(), std::vector<Distr>(m.num_actions())));
  for (int z = 0; z < m.num_obs(); ++z) {
    f.action_map[0][z] = p.rows[z];
    for (const auto& [a, pr] : p.rows[z]) f.memory_update[0][z][a] = {{0, 1.0}};
  }
  return f;
}

bool Fsc::is_deterministic() const {
  for (const auto& per_obs : action_map)
    for (const auto& row : per_obs)
      if (row.size() > 1 ||
          (row.size() == 1 && std::abs(row[0].second - 1.0) > kProbTol))
        return false;
  for (const auto& per_obs : memory_update)
    for (const auto& per_act : per_obs)
      for (const auto& row : per_act)
        if (row.size() > 1 ||
            (row.size() == 1 && std::abs(row[0].second - 1.0) > kProbTol))
          return false;
  return true;
}

void Fsc::validate(const Model& m) const {
  if (num_nodes < 1) throw ModelError("an FSC needs at least one memory node");
  if (initial_node < 0 || initial_node >= num_nodes)
    throw ModelError("FSC initial node out of range");
  if (m.kind != Model::Kind::pomdp)
    throw ModelError("FSCs run on POMDPs; lift MDPs via unique observations");
  if (static_cast<int>(action_map.size()) != num_nodes ||
      static_cast<int>(memory_update.size()) != num_nodes)
    throw ModelError("FSC tables do not cover every memory node");
  for (int n = 0; n < num_nodes; ++n) {
    if (static_cast<int>(action_map[n].size()) != m.num_obs() ||
        static_cast<int>(memory_update[n].size()) != m.num_obs())
      throw ModelError("FSC tables do not cover every observation");
    for (int z = 0; z < m.num_obs(); ++z) {
      const auto& row = action_map[n][z];
      if (row.empty()) continue;  // observation unused by this node
      check_distr(row, m.num_actions(),
                  "FSC action row (node " + std::to_string(n) + ", obs " +
                      m.obs_names[z] + ")");
      const auto avail = m.actions_at_obs(z);
      for (const auto& [a, p] : row) {
        if (std::find(avail.begin(), avail.end(), a) == avail.end())
          throw ModelError("FSC picks a disabled action under observation " +
                           m.obs_names[z]);
        if (static_cast<int>(memory_update[n][z].size()) <= a ||
            memory_update[n][z][a].empty())
          throw ModelError("FSC memory update missing for node " +
                           std::to_string(n) + ", obs " + m.obs_names[z] +
                           ", action " + m.action_names[a]);
        check_distr(memory_update[n][z][a], num_nodes,
                    "FSC memory row (node " + std::to_string(n) + ", obs " +
                        m.obs_names[z] + ", action " + m.action_names[a] + ")");
      }
    }
  }
}

namespace {

bool read_token(std::istringstream& in, std::string& tok) {
  return static_cast<bool>(in >> tok);
}

}  // namespace

Spec Spec::parse(const std::string& text) {
  // Normalize the unicode comparison glyphs so both spellings parse.
  std::string ascii;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, "\xe2\x89\xa5") == 0) {
      ascii += ">=";
      i += 2;
    } else if (text.compare(i, 3, "\xe2\x89\xa4") == 0) {
      ascii += "<=";
      i += 2;
    } else if (text[i] == '{' || text[i] == '}' || text[i] == ',') {
      ascii += ' ';
      ascii += text[i];
      ascii += ' ';
    } else {
      ascii += text[i];
    }
  }

  std::istringstream in(ascii);
  Spec spec;
  std::string tok;
  if (!read_token(in, tok))
    throw ModelError("empty specification");
  if (tok == "reach")
    spec.kind = Kind::reach;
  else if (tok == "cost")
    spec.kind = Kind::cost;
  else
    throw ModelError("specification must start with 'reach' or 'cost', got '" +
                     tok + "'");

  if (!read_token(in, tok)) throw ModelError("truncated specification");
  bool explicit_opt = false;
  if (tok == "max") {
    spec.optimize = Optimize::maximize;
    explicit_opt = true;
    if (!read_token(in, tok)) throw ModelError("truncated specification");
  } else if (tok == "min") {
    spec.optimize = Optimize::minimize;
    explicit_opt = true;
    if (!read_token(in, tok)) throw ModelError("truncated specification");
  }
  if (!explicit_opt)
    spec.optimize =
        spec.kind == Kind::reach ? Optimize::maximize : Optimize::minimize;

  if (tok == ">=")
    spec.direction = Direction::at_least;
  else if (tok == "<=")
    spec.direction = Direction::at_most;
  else
    throw ModelError("expected '>=' or '<=' in specification, got '" + tok +
                     "'");

  if (!read_token(in, tok)) throw ModelError("missing threshold");
  try {
    size_t used = 0;
    spec.threshold = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw ModelError("malformed threshold '" + tok + "'");
  }
  if (spec.kind == Kind::reach &&
      (spec.threshold < 0.0 || spec.threshold > 1.0))
    throw ModelError("reachability threshold must lie in [0, 1]");
  if (spec.kind == Kind::cost && spec.threshold < 0.0)
    throw ModelError("cost threshold must be nonnegative");

  if (!read_token(in, tok) || tok != "{")
    throw ModelError("expected '{' before the target set");
  while (read_token(in, tok) && tok != "}") {
    if (tok == ",") continue;
    spec.targets.push_back(tok);
  }
  if (tok != "}") throw ModelError("unterminated target set");
  if (spec.targets.empty()) throw ModelError("empty target set");
  if (read_token(in, tok))
    throw ModelError("trailing tokens after target set: '" + tok + "'");
  return spec;
}

std::string Spec::str() const {
  std::string out = kind == Kind::reach ? "reach" : "cost";
  const Optimize default_opt =
      kind == Kind::reach ? Optimize::maximize : Optimize::minimize;
  if (optimize != default_opt)
    out += optimize == Optimize::maximize ? " max" : " min";
  out += direction == Direction::at_least ? " >= " : " <= ";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", threshold);
  out += buf;
  out += " {";
  for (size_t i = 0; i < targets.size(); ++i) {
    if (i) out += ", ";
    out += targets[i];
  }
  out += "}";
  return out;
}

std::vector<char> Spec::target_mask(const Model& m) const {
  std::vector<char> mask(m.num_states, 0);
  for (const std::string& tok : targets) {
    bool matched = false;
    const int prop = m.prop_index(tok);
    if (prop >= 0) {
      for (int s = 0; s < m.num_states; ++s)
        if (m.has_label(s, prop)) {
          mask[s] = 1;
          matched = true;
        }
      if (matched) continue;
    }
    std::string digits = tok;
    if (!digits.empty() && (digits[0] == 's' || digits[0] == 'S'))
      digits = digits.substr(1);
    try {
      size_t used = 0;
      const int s = std::stoi(digits, &used);
      if (used == digits.size() && s >= 0 && s < m.num_states) {
        mask[s] = 1;
        matched = true;
      }
    } catch (const std::exception&) {
    }
    if (!matched)
      throw ModelError("target '" + tok +
                       "' names neither a state nor a label of the model");
  }
  return mask;
}

bool Spec::satisfied_by(double value) const {
  return direction == Direction::at_least ? value >= threshold - kProbTol
                                          : value <= threshold + kProbTol;
}

int Dfa::prop_index(const std::string& name) const {
  auto it = std::find(props.begin(), props.end(), name);
  return it == props.end() ? -1 : static_cast<int>(it - props.begin());
}

int Dfa::step(int q, const std::vector<char>& valuation) const {
  if (q < 0 || q >= num_states) throw ModelError("DFA state out of range");
  if (static_cast<int>(valuation.size()) != static_cast<int>(props.size()))
    throw ModelError("valuation arity does not match the DFA propositions");
  for (const Edge& e : edges) {
    if (e.from != q) continue;
    bool match = true;
    for (const auto& [p, want] : e.guard)
      if ((valuation[p] != 0) != want) {
        match = false;
        break;
      }
    if (match) return e.to;
  }
  throw ModelError("DFA transition function is partial at state " +
                   std::to_string(q));
}

void Dfa::validate() const {
  if (num_states < 1) throw ModelError("DFA must have at least one state");
  if (init < 0 || init >= num_states)
    throw ModelError("DFA initial state out of range");
  if (static_cast<int>(accepting.size()) != num_states)
    throw ModelError("DFA accepting flags do not cover every state");
  std::vector<char> has_default(num_states, 0);
  for (const Edge& e : edges) {
    if (e.from < 0 || e.from >= num_states || e.to < 0 || e.to >= num_states)
      throw ModelError("DFA edge endpoint out of range");
    std::vector<int> seen;
    for (const auto& [p, want] : e.guard) {
      (void)want;
      if (p < 0 || p >= static_cast<int>(props.size()))
        throw ModelError("DFA guard references an unknown proposition");
      if (std::find(seen.begin(), seen.end(), p) != seen.end())
        throw ModelError("DFA guard repeats a proposition");
      seen.push_back(p);
    }
    if (e.guard.empty()) has_default[e.from] = 1;
  }
  for (int q = 0; q < num_states; ++q)
    if (!has_default[q])
      throw ModelError("DFA state " + std::to_string(q) +
                       " lacks a catch-all default edge");
}

BeliefLabeling BeliefLabeling::uniform(int num_states,
                                       std::vector<std::string> props,
                                       double p) {
  BeliefLabeling bl;
  bl.props = std::move(props);
  bl.b.assign(num_states, std::vector<double>(bl.props.size(), p));
  return bl;
}

void BeliefLabeling::validate() const {
  for (const auto& row : b) {
    if (row.size() != props.size())
      throw ModelError("belief row arity does not match the propositions");
    for (double p : row)
      if (!(p >= 0.0 && p <= 1.0))
        throw ModelError("belief entries must lie in [0, 1]");
  }
}

std::pair<double, double> ObservationModel::rates_for(
    const std::string& prop) const {
  auto it = per_prop.find(prop);
  if (it != per_prop.end()) return it->second;
  return {true_positive, false_positive};
}

bool ObservationModel::visible(const Model& m, int agent_state,
                               int target_state) const {
  // A negative radius means an unlimited sensor, and a model without
  // coordinates has no notion of distance, so everything stays visible.
  if (radius < 0.0 || m.coords.empty()) return true;
  const auto& [ax, ay] = m.coords[agent_state];
  const auto& [tx, ty] = m.coords[target_state];
  const double dx = ax - tx, dy = ay - ty;
  return dx * dx + dy * dy <= radius * radius + kProbTol;
}

void ObservationModel::validate() const {
  auto check = [](double tp, double fp) {
    if (!(tp >= 0.0 && tp <= 1.0 && fp >= 0.0 && fp <= 1.0))
      throw ModelError("sensor rates must lie in [0, 1]");
  };
  check(true_positive, false_positive);
  for (const auto& [prop, rates] : per_prop) {
    (void)prop;
    check(rates.first, rates.second);
  }
}

}  // namespace verisynth
