#include "verisynth/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "verisynth/checker.hpp"

namespace verisynth {

namespace {

constexpr double kTol = 1e-9;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const BeliefLabeling& belief) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& row : belief.b)
    for (double v : row) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char byte : bytes) {
        h ^= byte;
        h *= 1099511628211ULL;
      }
    }
  return h;
}

double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double kl_term(double a, double m) {
  return a <= 0.0 ? 0.0 : a * std::log2(a / m);
}

// Valuation of the automaton's propositions at one state of a labeling.
std::vector<char> dfa_valuation(const Dfa& dfa, const GroundTruth& lab,
                                int s) {
  std::vector<char> val(dfa.props.size(), 0);
  for (size_t i = 0; i < dfa.props.size(); ++i)
    for (size_t j = 0; j < lab.props.size(); ++j)
      if (lab.props[j] == dfa.props[i]) {
        val[i] = lab.holds(s, static_cast<int>(j)) ? 1 : 0;
        break;
      }
  return val;
}

int find_prop(const std::vector<std::string>& props, const std::string& name) {
  for (size_t i = 0; i < props.size(); ++i)
    if (props[i] == name) return static_cast<int>(i);
  return -1;
}

int weighted_draw(const Distr& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  for (const auto& [i, p] : d) {
    u -= p;
    if (u <= 0.0) return i;
  }
  return d.back().first;
}

const Choice& choice_at(const Model& m, int s, int action) {
  for (const Choice& c : m.choices[s])
    if (c.action == action) return c;
  throw PlannerError("action not enabled at " + m.state_name(s));
}

int sample_transition(const Model& m, int s, int action,
                      std::mt19937_64& rng) {
  const Choice& c = choice_at(m, s, action);
  Distr d;
  for (const Transition& t : c.transitions) {
    if (!t.prob.is_point())
      throw PlannerError("the planner needs point transition probabilities");
    d.push_back({t.to, t.prob.lo});
  }
  return weighted_draw(d, rng);
}

// Expected entropy reduction (bits) of one noisy reading of a Bernoulli
// belief L through a (tp, fp) sensor: prior entropy minus expected posterior
// entropy; always >= 0, zero for uninformative sensors.
double reading_information(double L, double tp, double fp) {
  const double pt = L * tp + (1.0 - L) * fp;
  const double post_t = pt > 0.0 ? L * tp / pt : L;
  const double post_f = pt < 1.0 ? L * (1.0 - tp) / (1.0 - pt) : L;
  return h2(L) - (pt * h2(post_t) + (1.0 - pt) * h2(post_f));
}

}  // namespace

void PlannerConfig::validate() const {
  if (gamma_d < 0.0) throw PlannerError("divergence threshold must be >= 0");
  if (gamma_r < 0.0) throw PlannerError("risk threshold must be >= 0");
  if (risk_samples < 1) throw PlannerError("risk sample count must be >= 1");
  if (depth < 1) throw PlannerError("perception depth bound must be >= 1");
  if (beta < 0.0 || beta > 1.0)
    throw PlannerError("safety weight beta must lie in [0, 1]");
  if (step_cap < 1) throw PlannerError("step cap must be >= 1");
}

std::vector<Reading> sense(const Model& m, const GroundTruth& truth,
                           const ObservationModel& om, int agent_state,
                           const std::vector<std::string>& props,
                           std::mt19937_64& rng) {
  if (agent_state < 0 || agent_state >= m.num_states)
    throw PlannerError("agent state out of range");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Reading> out;
  for (int t = 0; t < m.num_states; ++t) {
    if (!om.visible(m, agent_state, t)) continue;
    for (size_t p = 0; p < props.size(); ++p) {
      const int gp = find_prop(truth.props, props[p]);
      const bool holds = gp >= 0 && truth.holds(t, gp);
      const auto [tp, fp] = om.rates_for(props[p]);
      out.push_back({t, static_cast<int>(p), unit(rng) < (holds ? tp : fp)});
    }
  }
  return out;
}

BeliefLabeling bayes_update(const BeliefLabeling& belief,
                            const ObservationModel& om, int agent_state,
                            const std::vector<Reading>& readings) {
  (void)agent_state;  // readings carry their own source states
  BeliefLabeling out = belief;
  bool warned = false;
  for (const Reading& r : readings) {
    if (r.state < 0 || r.state >= out.num_states() || r.prop < 0 ||
        r.prop >= out.num_props())
      throw PlannerError("reading indexes outside the belief");
    const auto [tp, fp] = om.rates_for(out.props[r.prop]);
    const double L = out.b[r.state][r.prop];
    const double num = r.value ? L * tp : L * (1.0 - tp);
    const double den = r.value ? L * tp + (1.0 - L) * fp
                               : L * (1.0 - tp) + (1.0 - L) * (1.0 - fp);
    if (den <= 0.0) {
      if (!warned)
        std::cerr << "warning: reading impossible under a degenerate prior; "
                     "belief entry pinned\n";
      warned = true;
      continue;
    }
    out.b[r.state][r.prop] = num / den;
  }
  return out;
}

double jsd(const BeliefLabeling& prior, const BeliefLabeling& posterior) {
  if (prior.b.size() != posterior.b.size() ||
      prior.props != posterior.props)
    throw PlannerError("beliefs index different (state, proposition) sets");
  double total = 0.0;
  for (size_t s = 0; s < prior.b.size(); ++s) {
    if (prior.b[s].size() != posterior.b[s].size())
      throw PlannerError("beliefs index different (state, proposition) sets");
    for (size_t p = 0; p < prior.b[s].size(); ++p) {
      const double a = prior.b[s][p], b = posterior.b[s][p];
      const double m = 0.5 * (a + b);
      total += 0.5 * (kl_term(a, m) + kl_term(1.0 - a, 1.0 - m)) +
               0.5 * (kl_term(b, m) + kl_term(1.0 - b, 1.0 - m));
    }
  }
  return total;
}

GroundTruth map_labeling(const BeliefLabeling& belief) {
  GroundTruth out;
  out.props = belief.props;
  out.num_states = belief.num_states();
  out.labels.resize(belief.b.size());
  for (size_t s = 0; s < belief.b.size(); ++s)
    for (size_t p = 0; p < belief.b[s].size(); ++p)
      if (belief.b[s][p] >= 0.5) out.labels[s].push_back(static_cast<int>(p));
  return out;
}

ProductInfo build_product(const Model& mdp, const Dfa& dfa,
                          const GroundTruth& labeling) {
  if (labeling.num_states != mdp.num_states)
    throw PlannerError("labeling covers a different state count");
  if (mdp.has_intervals() || mdp.has_params())
    throw PlannerError("the planner needs point transition probabilities");
  const int Q = dfa.num_states;
  ProductInfo out;
  out.dfa_states = Q;

  std::vector<std::vector<char>> vals(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s)
    vals[s] = dfa_valuation(dfa, labeling, s);

  Model& P = out.model;
  P.kind = Model::Kind::mdp;
  P.num_states = mdp.num_states * Q;
  P.action_names = mdp.action_names;
  P.prop_names = {"acc"};
  P.labels.resize(P.num_states);
  P.choices.resize(P.num_states);
  out.accepting.assign(P.num_states, 0);

  for (const auto& [s, pr] : mdp.initial) {
    const int q1 = dfa.step(dfa.init, vals[s]);
    P.initial.push_back({out.product_state(s, q1), pr});
  }
  for (int s = 0; s < mdp.num_states; ++s)
    for (int q = 0; q < Q; ++q) {
      const int ps = out.product_state(s, q);
      if (dfa.is_accepting(q)) {
        out.accepting[ps] = 1;
        P.labels[ps].push_back(0);
      }
      for (const Choice& c : mdp.choices[s]) {
        Choice nc;
        nc.action = c.action;
        nc.cost = c.cost;
        for (const Transition& t : c.transitions)
          nc.transitions.push_back(
              {out.product_state(t.to, dfa.step(q, vals[t.to])), t.prob});
        P.choices[ps].push_back(std::move(nc));
      }
    }
  P.validate();
  return out;
}

TaskPolicy synthesize_task_policy(const Model& mdp, const Dfa& dfa,
                                  const GroundTruth& labeling) {
  const ProductInfo info = build_product(mdp, dfa, labeling);
  const CheckResult res = max_reach_mdp(info.model, info.accepting);
  TaskPolicy out;
  out.value = res.initial_value;
  out.values = res.values;
  out.policy.kind = Policy::Kind::state_based;
  const int n = info.model.num_states;
  out.policy.rows.resize(n);

  // Optimizer candidates per state, in ascending action order.
  std::vector<std::vector<int>> cand(n);
  for (int ps = 0; ps < n; ++ps) {
    std::vector<std::pair<int, double>> qvals;
    for (const Choice& c : info.model.choices[ps]) {
      double q = 0.0;
      for (const Transition& t : c.transitions)
        q += t.prob.lo * res.values[t.to];
      qvals.push_back({c.action, q});
    }
    std::sort(qvals.begin(), qvals.end());
    double best = 0.0;
    for (const auto& [a, q] : qvals) best = std::max(best, q);
    for (const auto& [a, q] : qvals)
      if (q >= best - kTol) cand[ps].push_back(a);
  }

  // An action that merely preserves the optimum can tie with one that
  // attains it (a self-loop satisfies q(s,a) = v(s) at the fixpoint), and
  // picking it would induce a chain whose value falls short of v.  Rank
  // states by backward reachability from acceptance through candidate
  // actions and keep, per state, the smallest-index candidate with a
  // positive-probability edge to a strictly lower rank; the induced chain
  // then realizes the computed values.
  std::vector<int> rank(n, -1);
  for (int ps = 0; ps < n; ++ps)
    if (info.accepting[ps]) rank[ps] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int ps = 0; ps < n; ++ps) {
      if (rank[ps] >= 0 || res.values[ps] <= 0.0) continue;
      int best_rank = -1;
      for (int a : cand[ps]) {
        for (const Transition& t : choice_at(info.model, ps, a).transitions)
          if (t.prob.lo > 0.0 && rank[t.to] >= 0 &&
              (best_rank < 0 || rank[t.to] < best_rank))
            best_rank = rank[t.to];
      }
      if (best_rank >= 0) {
        rank[ps] = best_rank + 1;
        changed = true;
      }
    }
  }
  for (int ps = 0; ps < n; ++ps) {
    int pick = cand[ps].front();
    if (rank[ps] > 0) {
      for (int a : cand[ps]) {
        bool progresses = false;
        for (const Transition& t : choice_at(info.model, ps, a).transitions)
          if (t.prob.lo > 0.0 && rank[t.to] >= 0 && rank[t.to] < rank[ps])
            progresses = true;
        if (progresses) {
          pick = a;
          break;
        }
      }
    }
    out.policy.rows[ps] = {{pick, 1.0}};
  }
  return out;
}

namespace {

// Exact success probability of the product chain induced by the policy:
// restrict to the states reachable from the initial distribution, zero out
// those that cannot reach acceptance, and solve the remaining linear system
// by Gaussian elimination with partial pivoting.
double chain_value(const ProductInfo& info, const Policy& policy) {
  const Model& P = info.model;

  auto merged_row = [&](int ps) {
    std::map<int, double> row;
    const bool defined = ps < static_cast<int>(policy.rows.size()) &&
                         !policy.rows[ps].empty();
    if (!defined) {
      const double u = 1.0 / static_cast<double>(P.choices[ps].size());
      for (const Choice& c : P.choices[ps])
        for (const Transition& t : c.transitions)
          row[t.to] += u * t.prob.lo;
    } else {
      for (const auto& [a, pr] : policy.rows[ps]) {
        const Choice& c = choice_at(P, ps, a);
        for (const Transition& t : c.transitions)
          row[t.to] += pr * t.prob.lo;
      }
    }
    return row;
  };

  // Forward reachability (accepting states absorb).
  std::vector<char> seen(P.num_states, 0);
  std::deque<int> queue;
  for (const auto& [ps, pr] : P.initial) {
    (void)pr;
    if (!seen[ps]) {
      seen[ps] = 1;
      queue.push_back(ps);
    }
  }
  std::map<int, std::map<int, double>> rows;
  while (!queue.empty()) {
    const int ps = queue.front();
    queue.pop_front();
    if (info.accepting[ps]) continue;
    rows[ps] = merged_row(ps);
    for (const auto& [to, pr] : rows[ps]) {
      (void)pr;
      if (!seen[to]) {
        seen[to] = 1;
        queue.push_back(to);
      }
    }
  }

  // Backward: which reachable states still reach acceptance.
  std::map<int, std::vector<int>> preds;
  std::deque<int> back;
  std::set<int> live;
  for (int ps = 0; ps < P.num_states; ++ps)
    if (seen[ps] && info.accepting[ps]) {
      live.insert(ps);
      back.push_back(ps);
    }
  for (const auto& [ps, row] : rows)
    for (const auto& [to, pr] : row) {
      (void)pr;
      preds[to].push_back(ps);
    }
  while (!back.empty()) {
    const int ps = back.front();
    back.pop_front();
    for (int p : preds[ps])
      if (live.insert(p).second) back.push_back(p);
  }

  // Unknowns: reachable, live, non-accepting.
  std::vector<int> unknown;
  std::map<int, int> index;
  for (const auto& [ps, row] : rows) {
    (void)row;
    if (live.count(ps)) {
      index[ps] = static_cast<int>(unknown.size());
      unknown.push_back(ps);
    }
  }
  const int n = static_cast<int>(unknown.size());
  std::vector<double> x(n, 0.0);
  if (n > 0) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (int i = 0; i < n; ++i) {
      a[i][index[unknown[i]]] = 0.0;
      a[i][i] += 1.0;
      for (const auto& [to, pr] : rows[unknown[i]]) {
        if (info.accepting[to])
          a[i][n] += pr;
        else if (index.count(to))
          a[i][index[to]] -= pr;
      }
    }
    for (int col = 0; col < n; ++col) {
      int pivot = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
      if (std::abs(a[pivot][col]) < 1e-14)
        throw PlannerError("internal: singular chain system");
      std::swap(a[col], a[pivot]);
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        if (f == 0.0) continue;
        for (int cc = col; cc <= n; ++cc) a[r][cc] -= f * a[col][cc];
      }
    }
    for (int i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
  }

  double value = 0.0;
  for (const auto& [ps, pr] : P.initial) {
    if (info.accepting[ps])
      value += pr;
    else if (index.count(ps))
      value += pr * x[index[ps]];
  }
  return value;
}

GroundTruth sample_labeling(const BeliefLabeling& belief,
                            std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GroundTruth out;
  out.props = belief.props;
  out.num_states = belief.num_states();
  out.labels.resize(belief.b.size());
  for (size_t s = 0; s < belief.b.size(); ++s)
    for (size_t p = 0; p < belief.b[s].size(); ++p)
      if (unit(rng) < belief.b[s][p])
        out.labels[s].push_back(static_cast<int>(p));
  return out;
}

}  // namespace

double RiskReport::hoeffding(double eps) const {
  return 2.0 * std::exp(-2.0 * N * eps * eps);
}

RiskReport statistical_risk(const Model& mdp, const Dfa& dfa,
                            const Policy& policy,
                            const BeliefLabeling& belief, int N,
                            std::uint64_t seed) {
  if (N < 1) throw PlannerError("risk sample count must be >= 1");
  RiskReport rep;
  rep.N = N;
  rep.map_value = chain_value(build_product(mdp, dfa, map_labeling(belief)),
                              policy);
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    std::mt19937_64 rng(mix(seed ^ mix(static_cast<std::uint64_t>(i))));
    const GroundTruth lab = sample_labeling(belief, rng);
    sum += chain_value(build_product(mdp, dfa, lab), policy);
  }
  rep.empirical_mean = sum / N;
  rep.risk = std::abs(rep.map_value - rep.empirical_mean);
  return rep;
}

std::vector<int> active_perception_strategy(const Model& mdp, const Dfa& dfa,
                                            ProductState current,
                                            const BeliefLabeling& belief,
                                            const ObservationModel& om,
                                            const PlannerConfig& cfg) {
  cfg.validate();

  // Probability, per cell, that stepping onto it leaves the automaton state
  // untouched, under the belief's independent per-proposition Bernoullis.
  // Enumerating valuations is exponential in the automaton's proposition
  // count, so past a small cap fall back to the most-probable labeling.
  const int np = static_cast<int>(dfa.props.size());
  std::vector<double> stay(mdp.num_states, 1.0);
  if (np <= 12) {
    std::vector<int> bp(np);
    for (int p = 0; p < np; ++p) bp[p] = find_prop(belief.props, dfa.props[p]);
    for (int s = 0; s < mdp.num_states; ++s) {
      double keep = 0.0;
      for (int mask = 0; mask < (1 << np); ++mask) {
        double pr = 1.0;
        std::vector<char> val(np, 0);
        for (int p = 0; p < np; ++p) {
          const double q = bp[p] >= 0 ? belief.b[s][bp[p]] : 0.0;
          if (mask & (1 << p)) {
            val[p] = 1;
            pr *= q;
          } else {
            pr *= 1.0 - q;
          }
        }
        if (pr > 0.0 && dfa.step(current.q, val) == current.q) keep += pr;
      }
      stay[s] = keep;
    }
  } else {
    const GroundTruth map = map_labeling(belief);
    for (int s = 0; s < mdp.num_states; ++s)
      stay[s] = dfa.step(current.q, dfa_valuation(dfa, map, s)) == current.q
                    ? 1.0
                    : 0.0;
  }
  stay[current.s] = 1.0;  // its labels were consumed on arrival

  // Task-relevant propositions: those guarding edges out of the current
  // automaton state, mapped into the belief's proposition indices.
  std::vector<int> relevant;
  for (const Dfa::Edge& e : dfa.edges) {
    if (e.from != current.q) continue;
    for (const auto& [dp, want] : e.guard) {
      (void)want;
      const int bp = find_prop(belief.props, dfa.props[dp]);
      if (bp >= 0 &&
          std::find(relevant.begin(), relevant.end(), bp) == relevant.end())
        relevant.push_back(bp);
    }
  }

  // Expected one-step entropy reduction over everything visible from `pos`.
  auto info_at = [&](int pos) {
    double total = 0.0;
    for (int t = 0; t < mdp.num_states; ++t) {
      if (!om.visible(mdp, pos, t)) continue;
      for (int p : relevant) {
        const auto [tp, fp] = om.rates_for(belief.props[p]);
        total += reading_information(belief.b[t][p], tp, fp);
      }
    }
    return total;
  };

  struct Branch {
    double mass = 0.0;  // surviving probability mass at this state
    double gain = 0.0;  // mass-weighted information accumulated en route
  };
  struct Node {
    std::vector<int> seq;
    std::vector<std::pair<int, Branch>> dist;
    double unchanged = 1.0;  // Pr(automaton undisturbed)
    double info = 0.0;
    double safety = 0.0;
  };
  std::vector<Node> nodes;
  Node root;
  root.dist = {{current.s, Branch{1.0, 0.0}}};
  nodes.push_back(root);

  // Breadth-first expansion in ascending action order, so the node list is
  // sorted by (length, lexicographic sequence) and ties keep the first hit.
  for (size_t head = 0; head < nodes.size(); ++head) {
    const Node node = nodes[head];
    if (static_cast<int>(node.seq.size()) >= cfg.depth) continue;
    if (node.dist.empty()) continue;
    // Actions available from every state in the surviving support.
    std::vector<int> avail = mdp.actions_at(node.dist[0].first);
    for (size_t i = 1; i < node.dist.size(); ++i) {
      const std::vector<int> here = mdp.actions_at(node.dist[i].first);
      std::vector<int> keep;
      for (int a : avail)
        if (std::find(here.begin(), here.end(), a) != here.end())
          keep.push_back(a);
      avail.swap(keep);
    }
    for (int a : avail) {
      Node child;
      child.seq = node.seq;
      child.seq.push_back(a);
      std::map<int, Branch> dist;
      for (const auto& [s, br] : node.dist)
        for (const Transition& t : choice_at(mdp, s, a).transitions) {
          if (!t.prob.is_point())
            throw PlannerError(
                "the planner needs point transition probabilities");
          const double m = br.mass * t.prob.lo * stay[t.to];
          if (m <= 0.0) continue;
          Branch& b = dist[t.to];
          b.mass += m;
          // Readings accrue at every cell visited along the way, so carry
          // the path's accumulated information into the successor.
          b.gain += m * (br.gain / br.mass + info_at(t.to));
        }
      child.unchanged = 0.0;
      for (const auto& [s, br] : dist) {
        child.dist.push_back({s, br});
        child.unchanged += br.mass;
      }
      nodes.push_back(std::move(child));
    }
  }

  // Score pass: info is the conditional expectation, over survival, of the
  // information accumulated along the walk, in bits (capped at one bit so it
  // trades against the safety probability on a common scale); safety is the
  // probability that the automaton is undisturbed and the walk ends back
  // where it started.  A sequence is executed exactly as returned, so a node
  // that merely could return within the depth budget is not credited with
  // having done so: otherwise every one-step prefix of a round trip would
  // tie it and the shorter-sequence tie rule would always cut the return
  // leg.
  for (Node& node : nodes) {
    double info = 0.0, back = 0.0;
    if (node.unchanged > 0.0) {
      for (const auto& [s, br] : node.dist) {
        info += br.gain / node.unchanged;
        if (s == current.s) back += br.mass;
      }
    }
    node.info = std::min(info, 1.0);
    node.safety = back;  // joint: survived and finished at the root
  }
  size_t best = 0;
  double best_score = -1.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    const double score =
        cfg.beta * nodes[i].safety + (1.0 - cfg.beta) * nodes[i].info;
    if (score > best_score + 1e-12) {
      best_score = score;
      best = i;
    }
  }
  return nodes[best].seq;
}

std::string EpisodeTrace::to_jsonl() const {
  std::string out;
  for (const TraceStep& st : steps) {
    nlohmann::json j;
    j["t"] = st.t;
    j["state"] = st.state;
    j["q_true"] = st.q_true;
    j["q_believed"] = st.q_believed;
    j["readings"] = st.readings;
    j["divergence"] = st.divergence;
    j["replanned"] = st.replanned;
    if (st.risk.has_value()) j["risk"] = *st.risk;
    j["perception"] = st.perception;
    if (st.action >= 0) j["action"] = st.action;
    j["belief"] = st.belief_hash;
    out += j.dump();
    out += '\n';
  }
  nlohmann::json summary;
  summary["outcome"] = outcome;
  summary["steps"] = num_steps;
  summary["plans"] = num_plans;
  summary["perception_events"] = num_perception;
  out += summary.dump();
  out += '\n';
  return out;
}

EpisodeTrace run_episode(const Model& mdp, const Dfa& dfa,
                         const GroundTruth& truth, const ObservationModel& om,
                         const BeliefLabeling& prior,
                         const PlannerConfig& cfg) {
  cfg.validate();
  mdp.validate();
  dfa.validate();
  prior.validate();
  om.validate();
  if (prior.num_states() != mdp.num_states ||
      truth.num_states != mdp.num_states)
    throw PlannerError("belief / ground truth cover a different state count");

  std::mt19937_64 rng(mix(cfg.seed));
  EpisodeTrace trace;

  // Automaton states from which acceptance is still reachable (edge graph).
  std::vector<char> live(dfa.num_states, 0);
  {
    std::deque<int> queue;
    for (int q = 0; q < dfa.num_states; ++q)
      if (dfa.is_accepting(q)) {
        live[q] = 1;
        queue.push_back(q);
      }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Dfa::Edge& e : dfa.edges)
        if (live[e.to] && !live[e.from]) {
          live[e.from] = 1;
          changed = true;
        }
    }
  }

  int s = weighted_draw(mdp.initial, rng);
  int q_true = dfa.step(dfa.init, dfa_valuation(dfa, truth, s));
  BeliefLabeling belief = prior;
  GroundTruth map = map_labeling(belief);
  int q_hat = dfa.step(dfa.init, dfa_valuation(dfa, map, s));

  TaskPolicy task;
  bool planned = false;
  bool force_replan = true;
  bool just_perceived = false;  // perceive, then act: no back-to-back tours
  int t = 0;

  auto finish = [&](const std::string& outcome) {
    trace.outcome = outcome;
    trace.num_steps = t;
  };

  // One real transition: true dynamics, true labels for q_true, believed
  // (MAP) labels for q_hat.
  auto advance = [&](int action) {
    s = sample_transition(mdp, s, action, rng);
    q_true = dfa.step(q_true, dfa_valuation(dfa, truth, s));
    q_hat = dfa.step(q_hat, dfa_valuation(dfa, map, s));
    ++t;
  };

  while (true) {
    TraceStep st;
    st.t = t;
    st.state = s;
    st.q_true = q_true;
    st.q_believed = q_hat;

    // Observe and update.
    if (cfg.use_perception) {
      const std::vector<Reading> readings =
          sense(mdp, truth, om, s, belief.props, rng);
      st.readings = static_cast<int>(readings.size());
      BeliefLabeling post = bayes_update(belief, om, s, readings);
      st.divergence = jsd(belief, post);
      belief = std::move(post);
    }
    st.belief_hash = fnv1a(belief);

    // Replan on the first step, on a significant belief move (or always,
    // when the divergence gate is disabled).
    bool replan = force_replan;
    if (!replan && cfg.use_perception)
      replan = !cfg.use_divergence_test || st.divergence > cfg.gamma_d;
    if (replan) {
      map = map_labeling(belief);
      task = synthesize_task_policy(mdp, dfa, map);
      planned = true;
      force_replan = false;
      ++trace.num_plans;
    }
    st.replanned = replan;

    // Terminal conditions, checked after the mandatory first plan so the
    // trivially satisfied task reports one plan.
    if (dfa.is_accepting(q_true)) {
      trace.steps.push_back(st);
      finish("success");
      break;
    }
    if (!live[q_true]) {
      trace.steps.push_back(st);
      finish("failure");
      break;
    }
    if (t >= cfg.step_cap) {
      trace.steps.push_back(st);
      finish("timeout");
      break;
    }

    // Risk assessment follows each planning event; a risky plan triggers an
    // information-gathering excursion and a fresh plan afterwards.  An
    // excursion must be followed by at least one policy step before another
    // may start, so repeated marginal readings cannot stall progress.
    if (replan && cfg.use_active_perception && planned && !just_perceived) {
      const RiskReport rr = statistical_risk(
          mdp, dfa, task.policy, belief, cfg.risk_samples,
          mix(cfg.seed ^ mix(static_cast<std::uint64_t>(t) + 0x51aULL)));
      st.risk = rr.risk;
      if (rr.risk > cfg.gamma_r) {
        const std::vector<int> seq = active_perception_strategy(
            mdp, dfa, {s, q_hat}, belief, om, cfg);
        if (!seq.empty()) {
          ++trace.num_perception;
          trace.steps.push_back(st);
          for (int a : seq) {
            if (t >= cfg.step_cap || dfa.is_accepting(q_true) ||
                !live[q_true])
              break;
            TraceStep ps;
            ps.t = t;
            ps.state = s;
            ps.q_true = q_true;
            ps.q_believed = q_hat;
            ps.perception = true;
            ps.action = a;
            advance(a);
            if (cfg.use_perception) {
              const std::vector<Reading> readings =
                  sense(mdp, truth, om, s, belief.props, rng);
              ps.readings = static_cast<int>(readings.size());
              BeliefLabeling post = bayes_update(belief, om, s, readings);
              ps.divergence = jsd(belief, post);
              belief = std::move(post);
            }
            ps.belief_hash = fnv1a(belief);
            trace.steps.push_back(ps);
          }
          force_replan = true;
          just_perceived = true;
          continue;
        }
      }
    }

    // Act under the current policy.
    const int ps = s * dfa.num_states + q_hat;
    const Distr& row = task.policy.rows[ps];
    st.action = row.front().first;
    advance(st.action);
    trace.steps.push_back(st);
    just_perceived = false;
  }
  return trace;
}

EnsembleSummary run_ensemble(const Model& mdp, const Dfa& dfa,
                             const GroundTruth& truth,
                             const ObservationModel& om,
                             const BeliefLabeling& prior,
                             const PlannerConfig& cfg, int episodes) {
  if (episodes < 1) throw PlannerError("episode count must be >= 1");
  EnsembleSummary sum;
  sum.episodes = episodes;
  for (int e = 0; e < episodes; ++e) {
    PlannerConfig ecfg = cfg;
    ecfg.seed = cfg.seed ^ mix(static_cast<std::uint64_t>(e) + 1);
    const EpisodeTrace tr = run_episode(mdp, dfa, truth, om, prior, ecfg);
    sum.success_rate += tr.success() ? 1.0 : 0.0;
    sum.mean_steps += tr.num_steps;
    sum.mean_plans += tr.num_plans;
    sum.mean_perception += tr.num_perception;
  }
  sum.success_rate /= episodes;
  sum.mean_steps /= episodes;
  sum.mean_plans /= episodes;
  sum.mean_perception /= episodes;
  return sum;
}

std::string EnsembleSummary::csv_header() {
  return "variant,success,steps,plans,perception\n";
}

std::string EnsembleSummary::csv_row(const std::string& variant) const {
  std::ostringstream out;
  out.precision(6);
  out << variant << ',' << success_rate << ',' << mean_steps << ','
      << mean_plans << ',' << mean_perception << '\n';
  return out.str();
}

std::string CriticalReport::to_json() const {
  nlohmann::json j;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [n, s] : crit) arr.push_back({{"node", n}, {"state", s}});
  j["critical"] = arr;
  if (entropy.has_value())
    j["entropy"] = *entropy;
  else
    j["entropy"] = nullptr;
  return j.dump(2);
}

CriticalReport entropy_over_critical(const Model& m, const Fsc& fsc,
                                     const Spec& spec) {
  const CheckResult res = evaluate_fsc(m, fsc, spec);
  CriticalReport out;
  if (res.satisfied) return out;

  const int k = fsc.num_nodes;
  const std::vector<char> reachable = fsc_reachable(m, fsc);
  for (int n = 0; n < k; ++n)
    for (int s = 0; s < m.num_states; ++s)
      if (reachable[s * k + n] && !spec.satisfied_by(res.values[s * k + n]))
        out.crit.push_back({n, s});

  double sum = 0.0;
  int count = 0;
  for (const auto& [n, s] : out.crit) {
    const int acts = static_cast<int>(m.choices[s].size());
    if (acts < 2) continue;  // no decision at single-action states
    const Distr& row = fsc.action_map[n][m.observation[s]];
    double h = 0.0;
    for (const auto& [a, p] : row) {
      (void)a;
      if (p > 0.0) h -= p * std::log2(p);
    }
    sum += h / std::log2(static_cast<double>(acts));
    ++count;
  }
  out.entropy = count > 0 ? sum / count : 0.0;
  return out;
}

}  // namespace verisynth
