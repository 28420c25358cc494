#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "support/model_zoo.hpp"
#include "verisynth/checker.hpp"
#include "verisynth/model.hpp"
#include "verisynth/synth.hpp"

using namespace verisynth;

namespace {

// Parametric MDP: a risky coin with success chance v against a fixed 0.5
// coin, so the best achievable reach probability is max(v, 0.5).
Model risky_or_fair_pmdp() {
  Model m;
  m.kind = Model::Kind::mdp;
  m.num_states = 3;
  m.initial = {{0, 1.0}};
  m.action_names = {"risky", "fair"};
  m.params = {"v"};
  m.param_ranges = {{0.2, 0.9}};
  const auto v = ProbEntry::affine(0.0, {{0, 1.0}});
  const auto w = ProbEntry::affine(1.0, {{0, -1.0}});
  m.choices.resize(3);
  m.choices[0] = {{0, {{1, v}, {2, w}}, 0.0},
                  {1, {zoo::tr(1, 0.5), zoo::tr(2, 0.5)}, 0.0}};
  m.choices[1] = {{0, {zoo::tr(1, 1.0)}, 0.0}};
  m.choices[2] = {{0, {zoo::tr(2, 1.0)}, 0.0}};
  m.prop_names = {"goal"};
  m.labels = {{}, {0}, {}};
  return m;
}

// The uncertain coin dressed up as a single-action POMDP, for controller
// synthesis over a model with no decisions at all.
Model interval_coin_pomdp() {
  Model m = zoo::interval_coin_mc();
  m.kind = Model::Kind::pomdp;
  m.action_names = {"go"};
  for (auto& row : m.choices) row[0].action = 0;
  m.obs_names = {"flip", "won", "lost"};
  m.observation = {0, 1, 2};
  return m;
}

std::vector<double> accepted_values(const SynthReport& rep) {
  std::vector<double> out;
  for (const SynthStep& st : rep.steps)
    if (st.accepted) out.push_back(st.value);
  return out;
}

}  // namespace

TEST_SUITE("synth") {

// ------------------------------------------------------------- validation

TEST_CASE("parameter ranges must keep every entry strictly positive") {
  CHECK_NOTHROW(validate_parametric(zoo::coin_chain_pmc(), 1e-6));
  CHECK_NOTHROW(validate_parametric(zoo::coin_chain_pmc(0.01, 0.99), 1e-3));
  // The full unit range lets v (and 1-v) hit zero: legal as a model, but not
  // for synthesis.
  const Model unit = zoo::coin_chain_pmc(1e-9, 1.0 - 1e-9);
  CHECK_NOTHROW(unit.validate());
  CHECK_THROWS_WITH_AS(validate_parametric(unit, 1e-6),
                       doctest::Contains("graph-preserving"), SynthError);
  CHECK_NOTHROW(zoo::cubic_tree_pmc().validate());
  CHECK_THROWS_AS(validate_parametric(zoo::cubic_tree_pmc(), 1e-6),
                  SynthError);
  CHECK_THROWS_AS(validate_parametric(zoo::interval_coin_mc(), 1e-6),
                  SynthError);
}

TEST_CASE("instantiation evaluates the affine entries and drops the params") {
  const Model pm = zoo::coin_chain_pmc();
  const Model half = instantiate(pm, {{"v", 0.5}});
  CHECK_FALSE(half.has_params());
  CHECK(half.choices[0][0].transitions[0].prob == ProbEntry::point(0.5));
  CHECK(check(half, Spec::parse("reach >= 0.1 { goal }")).initial_value ==
        doctest::Approx(0.125).epsilon(1e-12));

  CHECK_THROWS_AS(instantiate(pm, {}), SynthError);
  CHECK_THROWS_AS(instantiate(pm, {{"w", 0.5}}), SynthError);
  CHECK_THROWS_AS(instantiate(pm, {{"v", 1.5}}), SynthError);
}

TEST_CASE("the cubic chain realizes its polynomial") {
  const Model pm = zoo::cubic_tree_pmc();
  const Spec spec = Spec::parse("reach >= 0.13 { goal }");
  for (const double v : {0.0, 0.13, 0.3, 0.525, 0.7, 0.89, 1.0}) {
    const double got =
        check(instantiate(pm, {{"v", v}}), spec).initial_value;
    CHECK(got == doctest::Approx(zoo::cubic_value(v)).epsilon(1e-12));
  }
}

// ---------------------------------------------------- parameter synthesis

TEST_CASE("an attainable threshold is certified with matching parameters") {
  const Model pm = zoo::coin_chain_pmc();
  const SynthReport rep =
      scp_param_synthesis(pm, Spec::parse("reach >= 0.14 { goal }"));
  CHECK(rep.status == SynthReport::Status::satisfied);
  CHECK(rep.status_str() == "satisfied");
  REQUIRE(rep.parameters.count("v") == 1);
  const double v = rep.parameters.at("v");
  CHECK(rep.certified_value >= 0.14);
  // The report's value is the polynomial at the returned parameter, not the
  // solver's internal estimate.
  CHECK(rep.certified_value ==
        doctest::Approx(zoo::coin_chain_value(v)).epsilon(1e-9));

  const std::vector<double> ups = accepted_values(rep);
  REQUIRE(!ups.empty());
  for (size_t i = 1; i < ups.size(); ++i) CHECK(ups[i] > ups[i - 1]);
  // The iteration started from the box midpoint.
  CHECK(ups.front() > zoo::coin_chain_value(0.5));
}

TEST_CASE("an unattainable threshold stops honestly near the true optimum") {
  const Model pm = zoo::coin_chain_pmc();
  const SynthReport rep =
      scp_param_synthesis(pm, Spec::parse("reach >= 0.5 { goal }"));
  CHECK(rep.status == SynthReport::Status::no_improvement);
  CHECK(rep.certified_value <= 4.0 / 27.0 + 1e-12);
  CHECK(rep.certified_value >= 4.0 / 27.0 - 1e-3);
  CHECK(rep.parameters.at("v") == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  CHECK(rep.final_delta < 1e-4);
}

TEST_CASE("a midpoint that already satisfies the spec returns immediately") {
  const SynthReport rep = scp_param_synthesis(
      zoo::coin_chain_pmc(), Spec::parse("reach >= 0.12 { goal }"));
  CHECK(rep.status == SynthReport::Status::satisfied);
  CHECK(rep.steps.empty());
  CHECK(rep.iterations == 0);
  CHECK(rep.certified_value == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("parameter-free models fall through to a plain check") {
  const SynthReport ok = scp_param_synthesis(
      zoo::eight_state_mdp(), Spec::parse("reach >= 0.85 { goal }"));
  CHECK(ok.status == SynthReport::Status::satisfied);
  CHECK(ok.certified_value == doctest::Approx(zoo::kEightStateBest));
  const SynthReport bad = scp_param_synthesis(
      zoo::eight_state_mdp(), Spec::parse("reach >= 0.9 { goal }"));
  CHECK(bad.status == SynthReport::Status::no_improvement);
}

TEST_CASE("action choices restrict parameter synthesis to the safety bound") {
  const Model pm = risky_or_fair_pmdp();
  CHECK_THROWS_WITH_AS(
      scp_param_synthesis(pm, Spec::parse("reach >= 0.9 { goal }")),
      doctest::Contains("safety"), SynthError);

  const SynthReport rep =
      scp_param_synthesis(pm, Spec::parse("reach <= 0.52 { goal }"));
  CHECK(rep.status == SynthReport::Status::satisfied);
  // Pushing v below 1/2 leaves the fair coin as the best response.
  CHECK(rep.certified_value >= 0.5 - 1e-9);
  CHECK(rep.certified_value <= 0.52);
  CHECK(rep.parameters.at("v") <= 0.52);
}

TEST_CASE("cost objectives are rejected by parameter synthesis") {
  CHECK_THROWS_AS(scp_param_synthesis(zoo::coin_chain_pmc(),
                                      Spec::parse("cost <= 2 { goal }")),
                  SynthError);
}

TEST_CASE("synthesis runs are deterministic and their traces parse") {
  const Spec spec = Spec::parse("reach >= 0.14 { goal }");
  const SynthReport a = scp_param_synthesis(zoo::coin_chain_pmc(), spec);
  const SynthReport b = scp_param_synthesis(zoo::coin_chain_pmc(), spec);
  CHECK(a.to_json() == b.to_json());

  const nlohmann::json j = nlohmann::json::parse(a.to_json());
  CHECK(j["status"] == "satisfied");
  CHECK(j["artifact"] == "parameters");
  CHECK(j["steps"].size() == a.steps.size());

  std::istringstream csv(a.trace_csv());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "iteration,value,delta,accepted");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == static_cast<int>(a.steps.size()));
}

// --------------------------------------------------- controller synthesis

TEST_CASE("two memory nodes crack the two-step maze") {
  const Model m = zoo::two_step_pomdp();
  const Spec spec = Spec::parse("reach >= 0.9 { goal }");
  const SynthReport rep = robust_fsc_synthesis(m, 2, spec);
  CHECK(rep.status == SynthReport::Status::satisfied);
  REQUIRE(rep.fsc.has_value());
  CHECK(rep.fsc->num_nodes == 2);
  CHECK(rep.certified_value >= 0.9);
  // The certificate is reproducible from the returned controller alone.
  CHECK(evaluate_fsc(m, *rep.fsc, spec).initial_value ==
        doctest::Approx(rep.certified_value).epsilon(1e-9));
  REQUIRE(rep.policy.has_value());

  const std::vector<double> ups = accepted_values(rep);
  for (size_t i = 1; i < ups.size(); ++i) CHECK(ups[i] > ups[i - 1]);
}

TEST_CASE("one memory node cannot beat the memoryless bound of one half") {
  const Model m = zoo::two_step_pomdp();
  const Spec spec = Spec::parse("reach >= 0.9 { goal }");
  const SynthReport rep = robust_fsc_synthesis(m, 1, spec);
  CHECK(rep.status != SynthReport::Status::satisfied);
  CHECK(rep.certified_value <= 0.5 + 1e-6);
  REQUIRE(rep.fsc.has_value());
  CHECK(rep.fsc->num_nodes == 1);
  CHECK(evaluate_fsc(m, *rep.fsc, spec).initial_value ==
        doctest::Approx(rep.certified_value).epsilon(1e-9));
}

TEST_CASE("against interval uncertainty the controller turns conservative") {
  const Model m = zoo::gamble_or_safe_pomdp();
  const Spec spec = Spec::parse("reach >= 0.58 { goal }");
  const SynthReport rep = robust_fsc_synthesis(m, 1, spec);
  CHECK(rep.status == SynthReport::Status::satisfied);
  CHECK(rep.certified_value >= 0.58);
  CHECK(rep.certified_value <= 0.6 + 1e-9);
  REQUIRE(rep.fsc.has_value());
  // The safe coin carries (almost) all the action mass.
  double safe_mass = 0.0;
  for (const auto& [a, p] : rep.fsc->action_map[0][0])
    if (a == 1) safe_mass = p;
  CHECK(safe_mass >= 0.8);
}

TEST_CASE("a decision-free uncertain model certifies its worst-case value") {
  const Model m = interval_coin_pomdp();
  const SynthReport rep =
      robust_fsc_synthesis(m, 1, Spec::parse("reach >= 0.5 { goal }"));
  CHECK(rep.status == SynthReport::Status::satisfied);
  CHECK(rep.certified_value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.steps.empty());
}

TEST_CASE("a warm start at the solution is accepted without any iteration") {
  const Model m = zoo::two_step_pomdp();
  const Spec spec = Spec::parse("reach >= 0.9 { goal }");
  const Fsc warm = zoo::two_node_solution(m);
  const SynthReport rep = robust_fsc_synthesis(m, 2, spec, {}, &warm);
  CHECK(rep.status == SynthReport::Status::satisfied);
  CHECK(rep.steps.empty());
  CHECK(rep.certified_value >= 0.99);

  CHECK_THROWS_WITH_AS(robust_fsc_synthesis(m, 3, spec, {}, &warm),
                       doctest::Contains("node count"), SynthError);
}

TEST_CASE("the guaranteed certificate never beats the nominal evaluation") {
  std::mt19937_64 rng(5150);
  const Spec spec = Spec::parse("reach >= 0.99 { goal }");
  ScpConfig cfg;
  cfg.max_iters = 30;
  cfg.omega = 1e-3;
  for (int round = 0; round < 5; ++round) {
    const Model m = zoo::random_interval_pomdp(rng);
    const SynthReport rep = robust_fsc_synthesis(m, 1, spec, cfg);
    REQUIRE(rep.fsc.has_value());
    const double nominal =
        evaluate_fsc(zoo::midpoint_collapse(m), *rep.fsc, spec).initial_value;
    CHECK(rep.certified_value <= nominal + 1e-9);
  }
}

TEST_CASE("controller synthesis rejects malformed requests") {
  const Model m = zoo::two_step_pomdp();
  const Spec spec = Spec::parse("reach >= 0.9 { goal }");
  CHECK_THROWS_AS(robust_fsc_synthesis(m, 0, spec), SynthError);
  CHECK_THROWS_AS(robust_fsc_synthesis(zoo::eight_state_mdp(), 2, spec),
                  SynthError);
  CHECK_THROWS_AS(robust_fsc_synthesis(zoo::coin_chain_pmc(), 2, spec),
                  SynthError);
  CHECK_THROWS_AS(
      robust_fsc_synthesis(m, 2, Spec::parse("cost <= 2 { goal }")),
      SynthError);
}

TEST_CASE("controller synthesis is deterministic") {
  const Model m = zoo::two_step_pomdp();
  const Spec spec = Spec::parse("reach >= 0.9 { goal }");
  const SynthReport a = robust_fsc_synthesis(m, 2, spec);
  const SynthReport b = robust_fsc_synthesis(m, 2, spec);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.fsc == b.fsc);
}

}
