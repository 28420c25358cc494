#include "verisynth/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace verisynth {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ModelError(path + ": " + msg);
}

const json& field(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string(what) + ": " + e.what());
  }
}

// Looks a name up in a list, appending it when absent (first-encounter order
// unless the list was pre-seeded from an explicit name array).
int intern(std::vector<std::string>& names, const std::string& name,
           bool allow_new, const std::string& path) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it != names.end()) return static_cast<int>(it - names.begin());
  if (!allow_new) fail(path, "unknown name '" + name + "'");
  names.push_back(name);
  return static_cast<int>(names.size()) - 1;
}

Distr parse_index_distr(const json& j, const std::string& path,
                        const char* idx_key) {
  Distr d;
  if (!j.is_array()) fail(path, "expected an array");
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    d.push_back({as_int(field(j[i], idx_key, p), p + "." + idx_key),
                 as_num(field(j[i], "p", p), p + ".p")});
  }
  return d;
}

json dump_index_distr(const Distr& d, const char* idx_key) {
  json out = json::array();
  for (const auto& [i, p] : d) out.push_back({{idx_key, i}, {"p", p}});
  return out;
}

}  // namespace

Model parse_model(const std::string& text) {
  const json j = parse_text(text, "model JSON");
  Model m;
  const std::string type = as_str(field(j, "type", "model"), "type");
  if (type == "mc" || type == "umc")
    m.kind = Model::Kind::mc;
  else if (type == "mdp" || type == "umdp")
    m.kind = Model::Kind::mdp;
  else if (type == "pomdp" || type == "upomdp")
    m.kind = Model::Kind::pomdp;
  else
    fail("type", "expected one of mc|mdp|pomdp|umc|umdp|upomdp, got '" + type +
                     "'");

  m.num_states = as_int(field(j, "states", "model"), "states");

  const json& init = field(j, "initial", "model");
  if (init.is_number_integer()) {
    m.initial = {{init.get<int>(), 1.0}};
  } else {
    m.initial = parse_index_distr(init, "initial", "s");
  }

  if (j.contains("actions"))
    for (size_t i = 0; i < j["actions"].size(); ++i)
      m.action_names.push_back(
          as_str(j["actions"][i], "actions[" + std::to_string(i) + "]"));

  if (j.contains("params")) {
    const json& params = j["params"];
    for (size_t i = 0; i < params.size(); ++i) {
      const std::string p = "params[" + std::to_string(i) + "]";
      m.params.push_back(as_str(field(params[i], "name", p), p + ".name"));
      const double lo = params[i].contains("lo")
                            ? as_num(params[i]["lo"], p + ".lo")
                            : 1e-6;
      const double hi = params[i].contains("hi")
                            ? as_num(params[i]["hi"], p + ".hi")
                            : 1.0 - 1e-6;
      m.param_ranges.push_back({lo, hi});
    }
  }

  m.choices.assign(m.num_states, {});
  const json& rows = field(j, "rows", "model");
  if (!rows.is_array()) fail("rows", "expected an array");
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "rows[" + std::to_string(i) + "]";
    const json& row = rows[i];
    const int s = as_int(field(row, "s", p), p + ".s");
    if (s < 0 || s >= m.num_states) fail(p + ".s", "state out of range");
    Choice c;
    if (m.kind != Model::Kind::mc) {
      const std::string a = as_str(field(row, "a", p), p + ".a");
      c.action = intern(m.action_names, a, false, p + ".a");
    } else if (row.contains("a")) {
      fail(p, "Markov chain rows carry no action");
    }
    const json& to = field(row, "to", p);
    if (!to.is_array()) fail(p + ".to", "expected an array");
    for (size_t t = 0; t < to.size(); ++t) {
      const std::string tp = p + ".to[" + std::to_string(t) + "]";
      const json& e = to[t];
      Transition tr;
      tr.to = as_int(field(e, "s", tp), tp + ".s");
      if (e.contains("p")) {
        tr.prob = ProbEntry::point(as_num(e["p"], tp + ".p"));
      } else if (e.contains("lo") || e.contains("hi")) {
        tr.prob = ProbEntry::interval(as_num(field(e, "lo", tp), tp + ".lo"),
                                      as_num(field(e, "hi", tp), tp + ".hi"));
      } else if (e.contains("c")) {
        std::vector<std::pair<int, double>> coeffs;
        if (e.contains("coeffs")) {
          if (!e["coeffs"].is_object()) fail(tp + ".coeffs", "expected an object");
          for (const auto& [name, cv] : e["coeffs"].items()) {
            auto it = std::find(m.params.begin(), m.params.end(), name);
            if (it == m.params.end())
              fail(tp + ".coeffs", "unknown parameter '" + name + "'");
            coeffs.push_back({static_cast<int>(it - m.params.begin()),
                              as_num(cv, tp + ".coeffs." + name)});
          }
        }
        tr.prob =
            ProbEntry::affine(as_num(e["c"], tp + ".c"), std::move(coeffs));
      } else {
        fail(tp, "entry needs 'p', 'lo'/'hi', or 'c'");
      }
      c.transitions.push_back(std::move(tr));
    }
    m.choices[s].push_back(std::move(c));
  }

  if (j.contains("obs_names"))
    for (size_t i = 0; i < j["obs_names"].size(); ++i)
      m.obs_names.push_back(
          as_str(j["obs_names"][i], "obs_names[" + std::to_string(i) + "]"));
  if (j.contains("obs")) {
    if (m.kind != Model::Kind::pomdp)
      fail("obs", "only POMDPs carry observations");
    const json& obs = j["obs"];
    if (!obs.is_object()) fail("obs", "expected an object keyed by state");
    m.observation.assign(m.num_states, -1);
    m.obs_dist.assign(m.num_states, {});
    const bool allow_new = m.obs_names.empty();
    for (int s = 0; s < m.num_states; ++s) {
      const std::string key = std::to_string(s);
      if (!obs.contains(key))
        fail("obs", "missing observation for state s" + key);
      const std::string p = "obs." + key;
      const json& o = obs[key];
      if (o.is_string()) {
        m.observation[s] =
            intern(m.obs_names, o.get<std::string>(), allow_new, p);
      } else if (o.is_object()) {
        for (const auto& [zname, pv] : o.items())
          m.obs_dist[s].push_back(
              {intern(m.obs_names, zname, allow_new, p), as_num(pv, p)});
      } else {
        fail(p, "expected an observation name or a distribution object");
      }
    }
    // Keep the canonical representation: fully deterministic observation
    // functions live in `observation` alone.
    bool any_dist = false;
    for (const Distr& d : m.obs_dist) any_dist = any_dist || !d.empty();
    if (!any_dist) m.obs_dist.clear();
  }

  if (j.contains("props"))
    for (size_t i = 0; i < j["props"].size(); ++i)
      m.prop_names.push_back(
          as_str(j["props"][i], "props[" + std::to_string(i) + "]"));
  if (j.contains("labels")) {
    const json& labels = j["labels"];
    if (!labels.is_object()) fail("labels", "expected an object keyed by state");
    m.labels.assign(m.num_states, {});
    const bool allow_new = !j.contains("props");
    for (const auto& [key, arr] : labels.items()) {
      int s = -1;
      try {
        s = std::stoi(key);
      } catch (const std::exception&) {
        fail("labels", "key '" + key + "' is not a state index");
      }
      if (s < 0 || s >= m.num_states) fail("labels." + key, "state out of range");
      if (!arr.is_array()) fail("labels." + key, "expected an array");
      for (size_t i = 0; i < arr.size(); ++i)
        m.labels[s].push_back(intern(
            m.prop_names, as_str(arr[i], "labels." + key), allow_new,
            "labels." + key));
    }
  }

  if (j.contains("rewards")) {
    const json& rws = j["rewards"];
    if (!rws.is_array()) fail("rewards", "expected an array");
    for (size_t i = 0; i < rws.size(); ++i) {
      const std::string p = "rewards[" + std::to_string(i) + "]";
      const int s = as_int(field(rws[i], "s", p), p + ".s");
      if (s < 0 || s >= m.num_states) fail(p + ".s", "state out of range");
      int a = -1;
      if (m.kind != Model::Kind::mc)
        a = intern(m.action_names,
                   as_str(field(rws[i], "a", p), p + ".a"), false, p + ".a");
      bool found = false;
      for (Choice& c : m.choices[s])
        if (c.action == a) {
          c.cost = as_num(field(rws[i], "r", p), p + ".r");
          found = true;
        }
      if (!found) fail(p, "no transition row matches this reward entry");
    }
  }

  if (j.contains("coords")) {
    const json& coords = j["coords"];
    if (!coords.is_array() ||
        static_cast<int>(coords.size()) != m.num_states)
      fail("coords", "expected one [x, y] pair per state");
    for (int s = 0; s < m.num_states; ++s) {
      const std::string p = "coords[" + std::to_string(s) + "]";
      if (!coords[s].is_array() || coords[s].size() != 2)
        fail(p, "expected [x, y]");
      m.coords.push_back(
          {as_num(coords[s][0], p), as_num(coords[s][1], p)});
    }
  }

  m.validate();
  return m;
}

std::string serialize_model(const Model& m) {
  json j;
  std::string type;
  switch (m.kind) {
    case Model::Kind::mc: type = "mc"; break;
    case Model::Kind::mdp: type = "mdp"; break;
    case Model::Kind::pomdp: type = "pomdp"; break;
  }
  if (m.has_intervals()) type = "u" + type;
  j["type"] = type;
  j["states"] = m.num_states;
  if (m.initial.size() == 1 && m.initial[0].second == 1.0)
    j["initial"] = m.initial[0].first;
  else
    j["initial"] = dump_index_distr(m.initial, "s");
  if (!m.action_names.empty()) j["actions"] = m.action_names;
  if (!m.params.empty()) {
    json params = json::array();
    for (int i = 0; i < m.num_params(); ++i)
      params.push_back({{"name", m.params[i]},
                        {"lo", m.param_ranges[i].first},
                        {"hi", m.param_ranges[i].second}});
    j["params"] = params;
  }

  json rows = json::array();
  for (int s = 0; s < m.num_states; ++s) {
    for (const Choice& c : m.choices[s]) {
      json row;
      row["s"] = s;
      if (c.action >= 0) row["a"] = m.action_names[c.action];
      json to = json::array();
      for (const Transition& t : c.transitions) {
        json e;
        e["s"] = t.to;
        switch (t.prob.kind) {
          case ProbEntry::Kind::point:
            e["p"] = t.prob.lo;
            break;
          case ProbEntry::Kind::interval:
            e["lo"] = t.prob.lo;
            e["hi"] = t.prob.hi;
            break;
          case ProbEntry::Kind::affine: {
            e["c"] = t.prob.constant;
            json coeffs = json::object();
            for (const auto& [p, cv] : t.prob.coeffs)
              coeffs[m.params[p]] = cv;
            e["coeffs"] = coeffs;
            break;
          }
        }
        to.push_back(e);
      }
      row["to"] = to;
      rows.push_back(row);
    }
  }
  j["rows"] = rows;

  if (m.kind == Model::Kind::pomdp) {
    j["obs_names"] = m.obs_names;
    json obs = json::object();
    for (int s = 0; s < m.num_states; ++s) {
      if (m.observation[s] >= 0) {
        obs[std::to_string(s)] = m.obs_names[m.observation[s]];
      } else {
        json dist = json::object();
        for (const auto& [z, p] : m.obs_dist[s]) dist[m.obs_names[z]] = p;
        obs[std::to_string(s)] = dist;
      }
    }
    j["obs"] = obs;
  }

  if (!m.prop_names.empty()) j["props"] = m.prop_names;
  if (!m.labels.empty()) {
    json labels = json::object();
    for (int s = 0; s < m.num_states; ++s) {
      if (m.labels[s].empty()) continue;
      json arr = json::array();
      for (int p : m.labels[s]) arr.push_back(m.prop_names[p]);
      labels[std::to_string(s)] = arr;
    }
    j["labels"] = labels;
  }

  json rewards = json::array();
  for (int s = 0; s < m.num_states; ++s)
    for (const Choice& c : m.choices[s])
      if (c.cost != 0.0) {
        json r;
        r["s"] = s;
        if (c.action >= 0) r["a"] = m.action_names[c.action];
        r["r"] = c.cost;
        rewards.push_back(r);
      }
  if (!rewards.empty()) j["rewards"] = rewards;

  if (!m.coords.empty()) {
    json coords = json::array();
    for (const auto& [x, y] : m.coords) coords.push_back({x, y});
    j["coords"] = coords;
  }

  return j.dump(2);
}

Dfa parse_dfa(const std::string& text) {
  const json j = parse_text(text, "DFA JSON");
  Dfa d;
  const json& props = field(j, "props", "dfa");
  for (size_t i = 0; i < props.size(); ++i)
    d.props.push_back(as_str(props[i], "props[" + std::to_string(i) + "]"));
  d.num_states = as_int(field(j, "states", "dfa"), "states");
  d.init = as_int(field(j, "init", "dfa"), "init");
  d.accepting.assign(d.num_states, 0);
  const json& acc = field(j, "accepting", "dfa");
  for (size_t i = 0; i < acc.size(); ++i) {
    const int q = as_int(acc[i], "accepting[" + std::to_string(i) + "]");
    if (q < 0 || q >= d.num_states)
      fail("accepting[" + std::to_string(i) + "]", "state out of range");
    d.accepting[q] = 1;
  }
  const json& edges = field(j, "edges", "dfa");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string p = "edges[" + std::to_string(i) + "]";
    Dfa::Edge e;
    e.from = as_int(field(edges[i], "from", p), p + ".from");
    e.to = as_int(field(edges[i], "to", p), p + ".to");
    const json& guard = field(edges[i], "guard", p);
    if (!guard.is_object()) fail(p + ".guard", "expected an object");
    for (const auto& [name, v] : guard.items()) {
      const int prop = d.prop_index(name);
      if (prop < 0) fail(p + ".guard", "unknown proposition '" + name + "'");
      if (v.is_string() && v.get<std::string>() == "*") continue;  // wildcard
      if (!v.is_boolean())
        fail(p + ".guard." + name, "expected true, false, or \"*\"");
      e.guard.push_back({prop, v.get<bool>()});
    }
    std::sort(e.guard.begin(), e.guard.end());
    d.edges.push_back(std::move(e));
  }
  d.validate();
  return d;
}

std::string serialize_dfa(const Dfa& d) {
  json j;
  j["props"] = d.props;
  j["states"] = d.num_states;
  j["init"] = d.init;
  json acc = json::array();
  for (int q = 0; q < d.num_states; ++q)
    if (d.accepting[q]) acc.push_back(q);
  j["accepting"] = acc;
  json edges = json::array();
  for (const Dfa::Edge& e : d.edges) {
    json guard = json::object();
    for (const auto& [p, v] : e.guard) guard[d.props[p]] = v;
    edges.push_back({{"from", e.from}, {"guard", guard}, {"to", e.to}});
  }
  j["edges"] = edges;
  return j.dump(2);
}

Fsc parse_fsc(const std::string& text, const Model& m) {
  const json j = parse_text(text, "FSC JSON");
  Fsc f;
  f.num_nodes = as_int(field(j, "nodes", "fsc"), "nodes");
  if (j.contains("initial")) f.initial_node = as_int(j["initial"], "initial");
  f.action_map.assign(f.num_nodes, std::vector<Distr>(m.num_obs()));
  f.memory_update.assign(
      f.num_nodes, std::vector<std::vector<Distr>>(
                       m.num_obs(), std::vector<Distr>(m.num_actions())));
  const json& am = field(j, "action_map", "fsc");
  for (size_t i = 0; i < am.size(); ++i) {
    const std::string p = "action_map[" + std::to_string(i) + "]";
    const int n = as_int(field(am[i], "n", p), p + ".n");
    const int z = m.obs_index(as_str(field(am[i], "z", p), p + ".z"));
    if (n < 0 || n >= f.num_nodes) fail(p + ".n", "node out of range");
    if (z < 0) fail(p + ".z", "unknown observation");
    const json& dist = field(am[i], "dist", p);
    for (size_t t = 0; t < dist.size(); ++t) {
      const std::string tp = p + ".dist[" + std::to_string(t) + "]";
      const int a =
          m.action_index(as_str(field(dist[t], "a", tp), tp + ".a"));
      if (a < 0) fail(tp + ".a", "unknown action");
      f.action_map[n][z].push_back(
          {a, as_num(field(dist[t], "p", tp), tp + ".p")});
    }
  }
  const json& mu = field(j, "memory_update", "fsc");
  for (size_t i = 0; i < mu.size(); ++i) {
    const std::string p = "memory_update[" + std::to_string(i) + "]";
    const int n = as_int(field(mu[i], "n", p), p + ".n");
    const int z = m.obs_index(as_str(field(mu[i], "z", p), p + ".z"));
    const int a = m.action_index(as_str(field(mu[i], "a", p), p + ".a"));
    if (n < 0 || n >= f.num_nodes) fail(p + ".n", "node out of range");
    if (z < 0) fail(p + ".z", "unknown observation");
    if (a < 0) fail(p + ".a", "unknown action");
    f.memory_update[n][z][a] =
        parse_index_distr(field(mu[i], "dist", p), p + ".dist", "n");
  }
  f.validate(m);
  return f;
}

std::string serialize_fsc(const Fsc& f, const Model& m) {
  json j;
  j["nodes"] = f.num_nodes;
  j["initial"] = f.initial_node;
  json am = json::array();
  json mu = json::array();
  for (int n = 0; n < f.num_nodes; ++n)
    for (int z = 0; z < m.num_obs(); ++z) {
      if (!f.action_map[n][z].empty()) {
        json dist = json::array();
        for (const auto& [a, p] : f.action_map[n][z])
          dist.push_back({{"a", m.action_names[a]}, {"p", p}});
        am.push_back({{"n", n}, {"z", m.obs_names[z]}, {"dist", dist}});
      }
      // Memory rows may exist for actions outside the action row's support;
      // keep them so the round trip is lossless.
      for (size_t a = 0; a < f.memory_update[n][z].size(); ++a)
        if (!f.memory_update[n][z][a].empty())
          mu.push_back(
              {{"n", n},
               {"z", m.obs_names[z]},
               {"a", m.action_names[a]},
               {"dist", dump_index_distr(f.memory_update[n][z][a], "n")}});
    }
  j["action_map"] = am;
  j["memory_update"] = mu;
  return j.dump(2);
}

Policy parse_policy(const std::string& text, const Model& m) {
  const json j = parse_text(text, "policy JSON");
  Policy p;
  const std::string kind = as_str(field(j, "kind", "policy"), "kind");
  if (kind == "state")
    p.kind = Policy::Kind::state_based;
  else if (kind == "observation")
    p.kind = Policy::Kind::observation_based;
  else
    fail("kind", "expected 'state' or 'observation'");
  p.rows.assign(
      p.kind == Policy::Kind::state_based ? m.num_states : m.num_obs(), {});
  const json& rows = field(j, "rows", "policy");
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string pp = "rows[" + std::to_string(i) + "]";
    const int idx = as_int(field(rows[i], "i", pp), pp + ".i");
    if (idx < 0 || idx >= static_cast<int>(p.rows.size()))
      fail(pp + ".i", "row index out of range");
    const json& dist = field(rows[i], "dist", pp);
    for (size_t t = 0; t < dist.size(); ++t) {
      const std::string tp = pp + ".dist[" + std::to_string(t) + "]";
      const int a =
          m.action_index(as_str(field(dist[t], "a", tp), tp + ".a"));
      if (a < 0) fail(tp + ".a", "unknown action");
      p.rows[idx].push_back({a, as_num(field(dist[t], "p", tp), tp + ".p")});
    }
  }
  p.validate(m);
  return p;
}

std::string serialize_policy(const Policy& p, const Model& m) {
  json j;
  j["kind"] = p.kind == Policy::Kind::state_based ? "state" : "observation";
  json rows = json::array();
  for (size_t i = 0; i < p.rows.size(); ++i) {
    if (p.rows[i].empty()) continue;
    json dist = json::array();
    for (const auto& [a, pr] : p.rows[i])
      dist.push_back({{"a", m.action_names[a]}, {"p", pr}});
    rows.push_back({{"i", static_cast<int>(i)}, {"dist", dist}});
  }
  j["rows"] = rows;
  return j.dump(2);
}

BeliefLabeling parse_belief(const std::string& text) {
  const json j = parse_text(text, "belief JSON");
  BeliefLabeling b;
  const json& props = field(j, "props", "belief");
  for (size_t i = 0; i < props.size(); ++i)
    b.props.push_back(as_str(props[i], "props[" + std::to_string(i) + "]"));
  const json& rows = field(j, "belief", "belief");
  if (!rows.is_array()) fail("belief", "expected an array of per-state rows");
  for (size_t s = 0; s < rows.size(); ++s) {
    const std::string p = "belief[" + std::to_string(s) + "]";
    if (!rows[s].is_array() || rows[s].size() != b.props.size())
      fail(p, "expected one probability per proposition");
    std::vector<double> row;
    for (size_t i = 0; i < rows[s].size(); ++i)
      row.push_back(as_num(rows[s][i], p));
    b.b.push_back(std::move(row));
  }
  b.validate();
  return b;
}

std::string serialize_belief(const BeliefLabeling& b) {
  json j;
  j["props"] = b.props;
  j["belief"] = b.b;
  return j.dump(2);
}

ObservationModel parse_obs_model(const std::string& text) {
  const json j = parse_text(text, "observation-model JSON");
  ObservationModel om;
  if (j.contains("true_positive"))
    om.true_positive = as_num(j["true_positive"], "true_positive");
  if (j.contains("false_positive"))
    om.false_positive = as_num(j["false_positive"], "false_positive");
  if (j.contains("radius")) om.radius = as_num(j["radius"], "radius");
  if (j.contains("per_prop")) {
    const json& pp = j["per_prop"];
    if (!pp.is_object()) fail("per_prop", "expected an object");
    for (const auto& [name, rates] : pp.items()) {
      if (!rates.is_array() || rates.size() != 2)
        fail("per_prop." + name, "expected [true_positive, false_positive]");
      om.per_prop[name] = {as_num(rates[0], "per_prop." + name),
                           as_num(rates[1], "per_prop." + name)};
    }
  }
  om.validate();
  return om;
}

std::string serialize_obs_model(const ObservationModel& om) {
  json j;
  j["true_positive"] = om.true_positive;
  j["false_positive"] = om.false_positive;
  j["radius"] = om.radius;
  if (!om.per_prop.empty()) {
    json pp = json::object();
    for (const auto& [name, rates] : om.per_prop)
      pp[name] = {rates.first, rates.second};
    j["per_prop"] = pp;
  }
  return j.dump(2);
}

bool GroundTruth::holds(int s, int prop) const {
  if (s < 0 || s >= num_states) return false;
  const auto& ls = labels[s];
  return std::find(ls.begin(), ls.end(), prop) != ls.end();
}

GroundTruth parse_ground_truth(const std::string& text) {
  const json j = parse_text(text, "ground-truth JSON");
  GroundTruth g;
  const json& props = field(j, "props", "truth");
  for (size_t i = 0; i < props.size(); ++i)
    g.props.push_back(as_str(props[i], "props[" + std::to_string(i) + "]"));
  g.num_states = as_int(field(j, "states", "truth"), "states");
  g.labels.assign(g.num_states, {});
  if (j.contains("labels")) {
    for (const auto& [key, arr] : j["labels"].items()) {
      int s = -1;
      try {
        s = std::stoi(key);
      } catch (const std::exception&) {
        fail("labels", "key '" + key + "' is not a state index");
      }
      if (s < 0 || s >= g.num_states)
        fail("labels." + key, "state out of range");
      for (size_t i = 0; i < arr.size(); ++i) {
        const std::string name = as_str(arr[i], "labels." + key);
        auto it = std::find(g.props.begin(), g.props.end(), name);
        if (it == g.props.end())
          fail("labels." + key, "unknown proposition '" + name + "'");
        g.labels[s].push_back(static_cast<int>(it - g.props.begin()));
      }
    }
  }
  return g;
}

std::string serialize_ground_truth(const GroundTruth& g) {
  json j;
  j["props"] = g.props;
  j["states"] = g.num_states;
  json labels = json::object();
  for (int s = 0; s < g.num_states; ++s) {
    if (g.labels[s].empty()) continue;
    json arr = json::array();
    for (int p : g.labels[s]) arr.push_back(g.props[p]);
    labels[std::to_string(s)] = arr;
  }
  j["labels"] = labels;
  return j.dump(2);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw ModelError("write failed: " + path);
}

}  // namespace verisynth
