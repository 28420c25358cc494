#include "verisynth/cli.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "verisynth/benchgen.hpp"
#include "verisynth/checker.hpp"
#include "verisynth/model_io.hpp"
#include "verisynth/scenario.hpp"
#include "verisynth/synth.hpp"

namespace verisynth {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void print_check_human(const CheckResult& res, const Spec& spec,
                       std::ostream& out) {
  out << "spec:       " << spec.str() << '\n';
  out << "value:      " << res.initial_value << '\n';
  out << "satisfied:  " << (res.satisfied ? "yes" : "no") << '\n';
  out << "method:     " << res.method << " (" << res.iterations
      << " iterations, " << res.wall_time_ms << " ms)\n";
}

void write_artifacts(const RunConfig& cfg, const Model& m,
                     const SynthReport& rep, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << rep.to_json() << '\n';
    return;
  }
  write_file(cfg.out_path + ".report.json", rep.to_json());
  write_file(cfg.out_path + ".trace.csv", rep.trace_csv());
  if (rep.fsc.has_value())
    write_file(cfg.out_path + ".fsc.json", serialize_fsc(*rep.fsc, m));
  if (rep.policy.has_value() && !rep.fsc.has_value())
    write_file(cfg.out_path + ".policy.json",
               serialize_policy(*rep.policy, m));
  out << "status:     " << rep.status_str() << '\n';
  out << "value:      " << rep.certified_value << '\n';
  out << "artifacts:  " << cfg.out_path << ".report.json";
  if (rep.fsc.has_value()) out << ", " << cfg.out_path << ".fsc.json";
  if (rep.policy.has_value() && !rep.fsc.has_value())
    out << ", " << cfg.out_path << ".policy.json";
  out << '\n';
}

}  // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Model m = parse_model(read_file(cfg.model_path));
    const Spec spec = Spec::parse(cfg.spec_text);
    CheckResult res;
    if (!cfg.fsc_path.empty()) {
      const Fsc fsc = parse_fsc(read_file(cfg.fsc_path), m);
      res = evaluate_fsc(m, fsc, spec);
    } else if (!cfg.policy_path.empty()) {
      const Policy pol = parse_policy(read_file(cfg.policy_path), m);
      res = robust_value(m, spec, &pol);
    } else {
      res = check(m, spec);
      if (m.kind == Model::Kind::pomdp)
        err << "note: no controller given; this is the fully-informed bound "
               "on the underlying MDP\n";
    }
    if (cfg.json)
      out << res.to_json() << '\n';
    else
      print_check_human(res, spec, out);
    return res.satisfied ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Model m = parse_model(read_file(cfg.model_path));
    const Spec spec = Spec::parse(cfg.spec_text);
    SynthReport rep;
    if (cfg.mode == "dual") {
      if (spec.kind != Spec::Kind::reach ||
          spec.direction != Spec::Direction::at_least)
        throw SynthError(
            "dual synthesis expects a 'reach ... >= beta' specification");
      const std::vector<char> mask = spec.target_mask(m);
      const DualSynthesis ds = dual_lp_synthesize(m, mask, spec.threshold);
      const CheckResult recheck = robust_value(m, spec, &ds.policy);
      rep.status = SynthReport::Status::satisfied;
      rep.certified_value = recheck.initial_value;
      rep.iterations = 1;
      rep.policy = ds.policy;
    } else if (cfg.mode == "param-scp") {
      rep = scp_param_synthesis(m, spec, cfg.scp);
    } else if (cfg.mode == "robust-fsc") {
      rep = robust_fsc_synthesis(m, cfg.k_memory, spec, cfg.scp);
    } else {
      throw SynthError("unknown synthesis mode '" + cfg.mode +
                       "' (expected dual, param-scp or robust-fsc)");
    }
    if (cfg.json && cfg.out_path.empty())
      out << rep.to_json() << '\n';
    else
      write_artifacts(cfg, m, rep, out);
    return rep.status == SynthReport::Status::satisfied ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_scenario(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Model m = parse_model(read_file(cfg.model_path));
    const Spec spec = Spec::parse(cfg.spec_text);
    ScenarioConfig sc;
    sc.K = cfg.samples;
    sc.nu = cfg.nu;
    sc.alpha = cfg.alpha;
    sc.seed = cfg.seed;
    const ScenarioReport rep = scenario_verify(m, spec, sc);
    if (cfg.json) {
      out << rep.to_json() << '\n';
    } else {
      out << "samples:    " << rep.K << '\n';
      out << "satisfied:  " << rep.sat_count << '\n';
      out << "violated:   " << rep.viol_count << '\n';
      if (rep.nu.has_value() && rep.alpha.has_value())
        out << "confidence: violation probability > " << *rep.nu
            << " with probability <= " << *rep.alpha << '\n';
      if (rep.nu_star.has_value())
        out << "nu*:        " << *rep.nu_star << '\n';
      for (const auto& [nu, alpha] : rep.alpha_table)
        out << "  nu=" << nu << "  alpha=" << alpha << '\n';
    }
    if (!cfg.out_path.empty()) write_file(cfg.out_path, rep.to_json());
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Model mdp = parse_model(read_file(cfg.model_path));
    const Dfa dfa = parse_dfa(read_file(cfg.dfa_path));
    const GroundTruth truth = parse_ground_truth(read_file(cfg.truth_path));
    const BeliefLabeling prior = parse_belief(read_file(cfg.prior_path));
    ObservationModel om;
    if (!cfg.obs_path.empty())
      om = parse_obs_model(read_file(cfg.obs_path));
    if (cfg.episodes < 1) throw PlannerError("episode count must be >= 1");

    EnsembleSummary sum;
    sum.episodes = cfg.episodes;
    std::string traces;
    for (int e = 0; e < cfg.episodes; ++e) {
      PlannerConfig ecfg = cfg.planner;
      ecfg.seed = cfg.planner.seed ^ mix(static_cast<std::uint64_t>(e) + 1);
      const EpisodeTrace tr = run_episode(mdp, dfa, truth, om, prior, ecfg);
      traces += tr.to_jsonl();
      sum.success_rate += tr.success() ? 1.0 : 0.0;
      sum.mean_steps += tr.num_steps;
      sum.mean_plans += tr.num_plans;
      sum.mean_perception += tr.num_perception;
    }
    sum.success_rate /= cfg.episodes;
    sum.mean_steps /= cfg.episodes;
    sum.mean_plans /= cfg.episodes;
    sum.mean_perception /= cfg.episodes;

    std::string variant = cfg.planner.use_perception
                              ? (cfg.planner.use_active_perception
                                     ? "active-perception"
                                     : "perception")
                              : "no-perception";
    if (cfg.planner.use_perception && !cfg.planner.use_divergence_test)
      variant += "-always-replan";
    out << EnsembleSummary::csv_header() << sum.csv_row(variant);
    if (!cfg.out_path.empty()) {
      write_file(cfg.out_path + ".jsonl", traces);
      write_file(cfg.out_path + ".csv",
                 EnsembleSummary::csv_header() + sum.csv_row(variant));
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.kind == "reach-avoid") {
      const PlannerInstance inst =
          make_reach_avoid(cfg.size, cfg.density, cfg.seed);
      if (cfg.out_path.empty())
        throw ModelError("gen reach-avoid needs --out PREFIX");
      write_file(cfg.out_path + ".model.json", serialize_model(inst.mdp));
      write_file(cfg.out_path + ".dfa.json", serialize_dfa(inst.dfa));
      write_file(cfg.out_path + ".truth.json",
                 serialize_ground_truth(inst.truth));
      write_file(cfg.out_path + ".prior.json", serialize_belief(inst.prior));
      write_file(cfg.out_path + ".obs.json", serialize_obs_model(inst.obs));
      out << "wrote " << cfg.out_path
          << ".{model,dfa,truth,prior,obs}.json\n";
      return 0;
    }
    const Benchmark bench = generate_benchmark(cfg.kind, cfg.size, cfg.seed);
    if (cfg.out_path.empty()) {
      out << serialize_model(bench.model);
      return 0;
    }
    write_file(cfg.out_path + ".model.json", serialize_model(bench.model));
    write_file(cfg.out_path + ".spec", bench.spec.str() + "\n");
    out << "wrote " << cfg.out_path << ".model.json and " << cfg.out_path
        << ".spec (" << bench.model.num_states << " states)\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  CLI::App app{
      "verisynth - verification and robust policy synthesis for Markov "
      "models under partial observability and interval uncertainty"};
  app.require_subcommand(1);

  const auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model file")->required();
  };
  const auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec_text,
                    "specification, e.g. \"reach max >= 0.9 { goal }\"")
        ->required();
  };
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_flag("--json", cfg.json, "machine-readable output");
    sub->add_option("--out", cfg.out_path, "output path prefix");
  };

  CLI::App* c_check = app.add_subcommand(
      "check",
      "verify a specification (a POMDP without a controller is checked as "
      "its underlying MDP, i.e. a fully-informed bound)");
  add_model(c_check);
  add_spec(c_check);
  c_check->add_option("--fsc", cfg.fsc_path, "evaluate this controller");
  c_check->add_option("--policy", cfg.policy_path,
                      "evaluate this fixed memoryless policy");
  add_common(c_check);

  CLI::App* c_synth =
      app.add_subcommand("synth", "synthesize a policy or controller");
  add_model(c_synth);
  add_spec(c_synth);
  c_synth->add_option("--mode", cfg.mode, "dual | param-scp | robust-fsc");
  c_synth->add_option("--k-memory", cfg.k_memory, "controller memory size");
  c_synth->add_option("--delta0", cfg.scp.delta0, "initial trust region");
  c_synth->add_option("--gamma", cfg.scp.gamma, "trust-region factor");
  c_synth->add_option("--omega", cfg.scp.omega, "trust-region stop size");
  c_synth->add_option("--tau", cfg.scp.tau, "slack penalty weight");
  c_synth->add_option("--eps-graph", cfg.scp.eps_graph,
                      "graph-preservation floor");
  c_synth->add_option("--max-iters", cfg.scp.max_iters, "iteration cap");
  add_common(c_synth);

  CLI::App* c_scenario = app.add_subcommand(
      "scenario", "sampling-based analysis of an uncertain model");
  add_model(c_scenario);
  add_spec(c_scenario);
  c_scenario->add_option("--samples", cfg.samples, "number of samples K");
  double nu_in = -1.0, alpha_in = -1.0;
  c_scenario->add_option("--nu", nu_in, "violation tolerance in [0, 1]");
  c_scenario->add_option("--alpha", alpha_in,
                         "confidence target in (0, 1] (bisects nu*)");
  add_common(c_scenario);

  CLI::App* c_plan = app.add_subcommand(
      "plan", "run task-planning episodes under uncertain labels");
  add_model(c_plan);
  c_plan->add_option("--dfa", cfg.dfa_path, "task automaton file")
      ->required();
  c_plan->add_option("--truth", cfg.truth_path, "ground-truth label file")
      ->required();
  c_plan->add_option("--prior", cfg.prior_path, "prior belief file")
      ->required();
  c_plan->add_option("--obs-model", cfg.obs_path, "sensor model file");
  c_plan->add_option("--episodes", cfg.episodes, "episode count");
  c_plan->add_option("--gamma-d", cfg.planner.gamma_d,
                     "replanning divergence threshold");
  c_plan->add_option("--gamma-r", cfg.planner.gamma_r, "risk threshold");
  c_plan->add_option("--beta", cfg.planner.beta,
                     "safety weight in the perception score");
  c_plan->add_option("--depth", cfg.planner.depth, "perception depth bound");
  c_plan->add_option("--risk-samples", cfg.planner.risk_samples,
                     "labelings per risk assessment");
  c_plan->add_option("--step-cap", cfg.planner.step_cap, "episode step cap");
  bool no_perception = false, always_replan = false, no_active = false;
  c_plan->add_flag("--no-perception", no_perception,
                   "keep the prior; never observe");
  c_plan->add_flag("--always-replan", always_replan,
                   "disable the divergence test");
  c_plan->add_flag("--no-active-perception", no_active,
                   "disable risk-triggered excursions");
  add_common(c_plan);

  CLI::App* c_gen = app.add_subcommand("gen", "generate a benchmark");
  c_gen->add_option("kind", cfg.kind,
                    "grid | maze | navigation | reach-avoid")
      ->required();
  c_gen->add_option("--size", cfg.size, "structure size c >= 1");
  c_gen->add_option("--density", cfg.density,
                    "reach-avoid obstacle density");
  add_common(c_gen);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (nu_in >= 0.0) cfg.nu = nu_in;
  if (alpha_in >= 0.0) cfg.alpha = alpha_in;
  cfg.planner.seed = cfg.seed;
  cfg.planner.use_perception = !no_perception;
  cfg.planner.use_divergence_test = !always_replan;
  cfg.planner.use_active_perception = !no_active && !no_perception;

  if (app.got_subcommand(c_check)) return cmd_check(cfg, out, err);
  if (app.got_subcommand(c_synth)) return cmd_synth(cfg, out, err);
  if (app.got_subcommand(c_scenario)) return cmd_scenario(cfg, out, err);
  if (app.got_subcommand(c_plan)) return cmd_plan(cfg, out, err);
  if (app.got_subcommand(c_gen)) return cmd_gen(cfg, out, err);
  err << "error: no subcommand selected\n";
  return 2;
}

}  // namespace verisynth
