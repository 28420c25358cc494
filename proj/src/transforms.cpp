#include "verisynth/transforms.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>

namespace verisynth {

namespace {

double prob_at(const Distr& row, int index) {
  for (const auto& [i, p] : row)
    if (i == index) return p;
  return 0.0;
}

bool is_dirac(const Choice& c) {
  return c.transitions.size() == 1 && c.transitions[0].prob.is_point() &&
         std::abs(c.transitions[0].prob.lo - 1.0) <= 1e-9;
}

// Accumulates sigma-weighted ProbEntry contributions toward one successor.
struct EntryMix {
  bool any_interval = false;
  bool any_affine = false;
  double lo = 0.0, hi = 0.0, constant = 0.0;
  std::map<int, double> coeffs;

  void add(double w, const ProbEntry& e) {
    switch (e.kind) {
      case ProbEntry::Kind::point:
        lo += w * e.lo;
        hi += w * e.lo;
        constant += w * e.lo;
        break;
      case ProbEntry::Kind::interval:
        any_interval = true;
        lo += w * e.lo;
        hi += w * e.hi;
        break;
      case ProbEntry::Kind::affine:
        any_affine = true;
        constant += w * e.constant;
        for (const auto& [j, c] : e.coeffs) coeffs[j] += w * c;
        break;
    }
  }

  ProbEntry finish() const {
    if (any_interval && any_affine)
      throw ModelError(
          "policy mixes interval and parametric entries into one row");
    if (any_affine) {
      std::vector<std::pair<int, double>> cs(coeffs.begin(), coeffs.end());
      return ProbEntry::affine(constant, std::move(cs));
    }
    if (any_interval) return ProbEntry::interval(lo, hi);
    return ProbEntry::point(lo);
  }
};

}  // namespace

Model induced_mc(const Model& m, const Policy& policy) {
  if (m.kind == Model::Kind::mc) return m;

  // Resolve each state's policy row up front; an empty row means "undefined".
  std::vector<const Distr*> row_of(m.num_states, nullptr);
  for (int s = 0; s < m.num_states; ++s) {
    const Distr& row = policy.row_for_state(m, s);
    if (!row.empty()) row_of[s] = &row;
  }

  // States reachable from the initial distribution must have a defined row.
  std::vector<char> reached(m.num_states, 0);
  std::deque<int> queue;
  for (const auto& [s, p] : m.initial) {
    (void)p;
    if (!reached[s]) {
      reached[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    if (row_of[s] == nullptr)
      throw ModelError("policy undefined on reachable state " +
                       m.state_name(s));
    for (const Choice& c : m.choices[s]) {
      if (prob_at(*row_of[s], c.action) <= 0.0) continue;
      for (const Transition& t : c.transitions)
        if (!reached[t.to]) {
          reached[t.to] = 1;
          queue.push_back(t.to);
        }
    }
  }

  Model out;
  out.kind = Model::Kind::mc;
  out.num_states = m.num_states;
  out.initial = m.initial;
  out.prop_names = m.prop_names;
  out.labels = m.labels;
  out.params = m.params;
  out.param_ranges = m.param_ranges;
  out.coords = m.coords;
  out.choices.assign(m.num_states, {});

  for (int s = 0; s < m.num_states; ++s) {
    Distr uniform;
    const Distr* row = row_of[s];
    if (row == nullptr) {  // unreachable: any proper row keeps the model valid
      const double p = 1.0 / static_cast<double>(m.choices[s].size());
      for (const Choice& c : m.choices[s]) uniform.push_back({c.action, p});
      row = &uniform;
    }
    Choice merged;
    merged.action = -1;
    std::map<int, EntryMix> acc;
    for (const auto& [a, pr] : *row) {
      const Choice* chosen = nullptr;
      for (const Choice& c : m.choices[s])
        if (c.action == a) chosen = &c;
      if (chosen == nullptr)
        throw ModelError("policy plays a disabled action at " +
                         m.state_name(s));
      merged.cost += pr * chosen->cost;
      for (const Transition& t : chosen->transitions) acc[t.to].add(pr, t.prob);
    }
    for (const auto& [to, mix] : acc)
      merged.transitions.push_back({to, mix.finish()});
    out.choices[s].push_back(std::move(merged));
  }
  out.validate();
  return out;
}

Model expand_observations(const Model& m) {
  if (m.kind != Model::Kind::pomdp)
    throw ModelError("only POMDPs have observations to expand");
  bool any_stochastic = false;
  for (int z : m.observation)
    if (z < 0) any_stochastic = true;
  if (!any_stochastic) return m;

  // copies[s] lists (observation, weight, new index) for each split of s.
  struct Copy {
    int obs;
    double weight;
    int index;
  };
  std::vector<std::vector<Copy>> copies(m.num_states);
  int next = 0;
  for (int s = 0; s < m.num_states; ++s) {
    if (m.observation[s] >= 0) {
      copies[s].push_back({m.observation[s], 1.0, next++});
    } else {
      for (const auto& [z, p] : m.obs_dist[s])
        copies[s].push_back({z, p, next++});
    }
  }

  Model out;
  out.kind = Model::Kind::pomdp;
  out.num_states = next;
  out.action_names = m.action_names;
  out.obs_names = m.obs_names;
  out.prop_names = m.prop_names;
  out.params = m.params;
  out.param_ranges = m.param_ranges;
  out.choices.assign(next, {});
  out.observation.assign(next, -1);
  if (!m.labels.empty()) out.labels.assign(next, {});
  for (const auto& [s, p] : m.initial)
    for (const Copy& c : copies[s]) out.initial.push_back({c.index, p * c.weight});

  auto scale = [](const ProbEntry& e, double w) {
    switch (e.kind) {
      case ProbEntry::Kind::point:
        return ProbEntry::point(e.lo * w);
      case ProbEntry::Kind::interval:
        return ProbEntry::interval(e.lo * w, e.hi * w);
      case ProbEntry::Kind::affine: {
        auto coeffs = e.coeffs;
        for (auto& [j, c] : coeffs) c *= w;
        return ProbEntry::affine(e.constant * w, std::move(coeffs));
      }
    }
    throw ModelError("unreachable entry kind");
  };

  for (int s = 0; s < m.num_states; ++s) {
    for (const Copy& self : copies[s]) {
      out.observation[self.index] = self.obs;
      if (!m.labels.empty()) out.labels[self.index] = m.labels[s];
      if (!m.coords.empty()) out.coords.push_back(m.coords[s]);
      for (const Choice& c : m.choices[s]) {
        Choice nc;
        nc.action = c.action;
        nc.cost = c.cost;
        for (const Transition& t : c.transitions)
          for (const Copy& dest : copies[t.to])
            nc.transitions.push_back({dest.index, scale(t.prob, dest.weight)});
        out.choices[self.index].push_back(std::move(nc));
      }
    }
  }
  out.validate();
  return out;
}

std::vector<char> FscProductInfo::lift_mask(
    const std::vector<char>& mask) const {
  std::vector<char> out(model.num_states, 0);
  for (int s = 0; s < base_states; ++s)
    for (int n = 0; n < k; ++n) out[product_state(s, n)] = mask[s];
  return out;
}

Fsc FscProductInfo::fold_back(const Policy& product_policy) const {
  if (product_policy.kind != Policy::Kind::observation_based)
    throw ModelError("only observation-based product policies fold into FSCs");
  if (static_cast<int>(product_policy.rows.size()) != base_obs * k)
    throw ModelError("product policy row count does not match the product");
  Fsc f;
  f.num_nodes = k;
  f.initial_node = 0;
  f.action_map.assign(k, std::vector<Distr>(base_obs));
  f.memory_update.assign(
      k, std::vector<std::vector<Distr>>(base_obs,
                                         std::vector<Distr>(base_actions)));
  for (int z = 0; z < base_obs; ++z)
    for (int n = 0; n < k; ++n) {
      std::map<int, double> alpha;
      std::map<int, std::map<int, double>> eta;
      for (const auto& [pa, p] : product_policy.rows[product_obs(z, n)]) {
        alpha[pa / k] += p;
        eta[pa / k][pa % k] += p;
      }
      for (const auto& [a, w] : alpha) {
        if (w <= 1e-15) continue;
        f.action_map[n][z].push_back({a, w});
        for (const auto& [n2, q] : eta[a])
          f.memory_update[n][z][a].push_back({n2, q / w});
      }
    }
  return f;
}

FscProductInfo fsc_product_info(const Model& m, int k) {
  if (k < 1) throw ModelError("memory size k must be at least 1");
  if (m.kind != Model::Kind::pomdp)
    throw ModelError("FSC products are defined over POMDPs");
  for (int z : m.observation)
    if (z < 0)
      throw ModelError("FSC products need deterministic observations (run "
                       "expand_observations first)");

  FscProductInfo info;
  info.k = k;
  info.base_states = m.num_states;
  info.base_obs = m.num_obs();
  info.base_actions = m.num_actions();
  if (k == 1) {
    info.model = m;
    return info;
  }

  Model out;
  out.kind = Model::Kind::pomdp;
  out.num_states = m.num_states * k;
  for (const std::string& a : m.action_names)
    for (int n = 0; n < k; ++n)
      out.action_names.push_back(a + "@" + std::to_string(n));
  for (const std::string& z : m.obs_names)
    for (int n = 0; n < k; ++n)
      out.obs_names.push_back(z + "@" + std::to_string(n));
  out.prop_names = m.prop_names;
  out.params = m.params;
  out.param_ranges = m.param_ranges;
  for (const auto& [s, p] : m.initial)
    out.initial.push_back({info.product_state(s, 0), p});
  out.choices.assign(out.num_states, {});
  out.observation.assign(out.num_states, -1);
  if (!m.labels.empty()) out.labels.assign(out.num_states, {});
  for (int s = 0; s < m.num_states; ++s)
    for (int n = 0; n < k; ++n) {
      const int ps = info.product_state(s, n);
      out.observation[ps] = info.product_obs(m.observation[s], n);
      if (!m.labels.empty()) out.labels[ps] = m.labels[s];
      if (!m.coords.empty()) out.coords.push_back(m.coords[s]);
      for (const Choice& c : m.choices[s])
        for (int n2 = 0; n2 < k; ++n2) {
          Choice nc;
          nc.action = info.product_action(c.action, n2);
          nc.cost = c.cost;
          for (const Transition& t : c.transitions)
            nc.transitions.push_back({info.product_state(t.to, n2), t.prob});
          out.choices[ps].push_back(std::move(nc));
        }
    }
  out.validate();
  info.model = std::move(out);
  return info;
}

Model fsc_product(const Model& m, int k) { return fsc_product_info(m, k).model; }

namespace {

// Binary decision tree over action slots [lo, hi): assigns internal-node ids
// in preorder and records each slot's (node, branch) path.
void build_tree(int lo, int hi, std::vector<std::pair<int, int>> prefix,
                int& next_node,
                std::vector<std::vector<std::pair<int, int>>>& slot_paths) {
  if (hi - lo == 1) {
    slot_paths[lo] = std::move(prefix);
    return;
  }
  const int node = next_node++;
  const int mid = lo + (hi - lo + 1) / 2;
  auto left = prefix;
  left.push_back({node, 0});
  build_tree(lo, mid, std::move(left), next_node, slot_paths);
  prefix.push_back({node, 1});
  build_tree(mid, hi, std::move(prefix), next_node, slot_paths);
}

int intern_name(std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it != names.end()) return static_cast<int>(it - names.begin());
  names.push_back(name);
  return static_cast<int>(names.size()) - 1;
}

}  // namespace

SimpleForm to_simple_info(const Model& m) {
  if (m.kind != Model::Kind::pomdp)
    throw ModelError("the simple form is defined over POMDPs");
  for (int z : m.observation)
    if (z < 0)
      throw ModelError("the simple form needs deterministic observations");

  SimpleForm sf;
  Model& out = sf.model;
  out = m;  // originals keep their indices; auxiliaries are appended
  const int Z = m.num_obs();
  sf.state_map.resize(m.num_states);
  for (int s = 0; s < m.num_states; ++s) sf.state_map[s] = s;
  sf.slot_actions.assign(Z, {});
  sf.paths.assign(Z, {});

  // Per-observation skeleton: sorted action slots, decision-tree node
  // observations, and slot paths (shared by every state carrying the obs).
  int cont_action = -1, left_action = -1, right_action = -1;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> slot_node_paths(Z);
  std::vector<std::vector<int>> tree_obs(Z);
  std::vector<char> obs_used(Z, 0);
  for (int s = 0; s < m.num_states; ++s) obs_used[m.observation[s]] = 1;

  for (int z = 0; z < Z; ++z) {
    if (!obs_used[z]) continue;
    sf.slot_actions[z] = m.actions_at_obs(z);
    const int cnt = static_cast<int>(sf.slot_actions[z].size());
    sf.paths[z].assign(cnt, {});
    if (cnt == 1) continue;
    if (cnt == 2) {
      sf.paths[z][0] = {{z, sf.slot_actions[z][0]}};
      sf.paths[z][1] = {{z, sf.slot_actions[z][1]}};
      continue;
    }
    // cnt >= 3: relay + binary tree of cnt-1 fresh choice states.
    if (cont_action < 0) cont_action = intern_name(out.action_names, "@cont");
    if (left_action < 0) left_action = intern_name(out.action_names, "@left");
    if (right_action < 0) right_action = intern_name(out.action_names, "@right");
    slot_node_paths[z].assign(cnt, {});
    int next_node = 0;
    build_tree(0, cnt, {}, next_node, slot_node_paths[z]);
    tree_obs[z].resize(next_node);
    for (int t = 0; t < next_node; ++t)
      tree_obs[z][t] = intern_name(
          out.obs_names, m.obs_names[z] + "#" + std::to_string(t));
    for (int i = 0; i < cnt; ++i)
      for (const auto& [node, dir] : slot_node_paths[z][i])
        sf.paths[z][i].push_back(
            {tree_obs[z][node], dir == 0 ? left_action : right_action});
  }

  std::map<std::pair<int, int>, int> outcome_obs;  // (obs, slot) -> new obs
  auto outcome_obs_for = [&](int z, int slot) {
    auto it = outcome_obs.find({z, slot});
    if (it != outcome_obs.end()) return it->second;
    const int idx = intern_name(
        out.obs_names, out.obs_names[z] + "!" + std::to_string(slot));
    outcome_obs.emplace(std::pair<int, int>{z, slot}, idx);
    return idx;
  };
  auto new_state = [&](int obs, int parent) {
    const int idx = out.num_states++;
    out.choices.emplace_back();
    out.observation.push_back(obs);
    if (!out.labels.empty()) out.labels.emplace_back();
    if (!out.coords.empty()) out.coords.push_back(m.coords[parent]);
    return idx;
  };

  for (int s = 0; s < m.num_states; ++s) {
    const int z = m.observation[s];
    const auto& slots = sf.slot_actions[z];
    const int cnt = static_cast<int>(slots.size());
    if (cnt == 1) continue;

    auto choice_for = [&](int slot) -> const Choice& {
      for (const Choice& c : m.choices[s])
        if (c.action == slots[slot]) return c;
      throw ModelError("missing action row at " + m.state_name(s));
    };
    // Leaf hook-up: the edge committing to action slot i carries the original
    // cost and leads either straight to a Dirac successor or into a fresh
    // single-action outcome state holding the original row.
    auto leaf_target = [&](int slot) {
      const Choice& c = choice_for(slot);
      if (is_dirac(c)) return c.transitions[0].to;
      const int u = new_state(outcome_obs_for(z, slot), s);
      Choice row;
      row.action = cont_action < 0
                       ? (cont_action = intern_name(out.action_names, "@cont"))
                       : cont_action;
      row.transitions = c.transitions;
      out.choices[u].push_back(std::move(row));
      return u;
    };

    if (cnt == 2) {
      bool all_dirac = true;
      for (const Choice& c : m.choices[s])
        if (!is_dirac(c)) all_dirac = false;
      if (all_dirac) continue;  // already a valid choice state
      std::vector<Choice> rebuilt;
      for (int i = 0; i < 2; ++i) {
        Choice nc;
        nc.action = slots[i];
        nc.cost = choice_for(i).cost;
        nc.transitions = {{leaf_target(i), ProbEntry::point(1.0)}};
        rebuilt.push_back(std::move(nc));
      }
      out.choices[s] = std::move(rebuilt);
      continue;
    }

    // cnt >= 3: materialize the shared tree skeleton for this state.
    const int num_nodes = static_cast<int>(tree_obs[z].size());
    std::vector<int> node_state(num_nodes);
    for (int t = 0; t < num_nodes; ++t)
      node_state[t] = new_state(tree_obs[z][t], s);
    // children[t][dir] = (slot committed, or next node)
    struct Child {
      bool leaf = false;
      int target = -1;  // slot index when leaf, node id otherwise
    };
    std::vector<std::array<Child, 2>> children(num_nodes);
    for (int i = 0; i < cnt; ++i) {
      const auto& path = slot_node_paths[z][i];
      for (size_t d = 0; d < path.size(); ++d) {
        const auto& [node, dir] = path[d];
        if (d + 1 == path.size())
          children[node][dir] = {true, i};
        else
          children[node][dir] = {false, path[d + 1].first};
      }
    }
    for (int t = 0; t < num_nodes; ++t)
      for (int dir = 0; dir < 2; ++dir) {
        const Child& ch = children[t][dir];
        Choice nc;
        nc.action = dir == 0 ? left_action : right_action;
        if (ch.leaf) {
          nc.cost = choice_for(ch.target).cost;
          nc.transitions = {{leaf_target(ch.target), ProbEntry::point(1.0)}};
        } else {
          nc.transitions = {{node_state[ch.target], ProbEntry::point(1.0)}};
        }
        out.choices[node_state[t]].push_back(std::move(nc));
      }
    // The original state becomes a relay into the tree root.
    Choice relay;
    relay.action = cont_action;
    relay.transitions = {{node_state[0], ProbEntry::point(1.0)}};
    out.choices[s] = {std::move(relay)};
  }

  out.validate();
  return sf;
}

Model to_simple(const Model& m) { return to_simple_info(m).model; }

Policy fold_simple_policy(const SimpleForm& sf, const Policy& simple_policy) {
  if (simple_policy.kind != Policy::Kind::observation_based)
    throw ModelError("fold_simple_policy needs an observation-based policy");
  Policy out;
  out.kind = Policy::Kind::observation_based;
  out.rows.assign(sf.paths.size(), {});
  for (size_t z = 0; z < sf.paths.size(); ++z) {
    if (sf.paths[z].empty()) continue;
    double total = 0.0;
    Distr row;
    for (size_t slot = 0; slot < sf.paths[z].size(); ++slot) {
      double p = 1.0;
      for (const auto& [oz, oa] : sf.paths[z][slot]) {
        if (oz >= static_cast<int>(simple_policy.rows.size()))
          throw ModelError("simple policy does not cover auxiliary obs");
        p *= prob_at(simple_policy.rows[oz], oa);
      }
      if (p > 0.0) row.push_back({sf.slot_actions[z][slot], p});
      total += p;
    }
    if (total <= 0.0)
      throw ModelError("simple policy assigns no mass under an observation");
    for (auto& [a, p] : row) {
      (void)a;
      p /= total;
    }
    out.rows[z] = std::move(row);
  }
  return out;
}

}  // namespace verisynth
