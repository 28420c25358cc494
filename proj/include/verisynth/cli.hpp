#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "verisynth/planner.hpp"
#include "verisynth/scp.hpp"

namespace verisynth {

// Parsed command-line configuration shared by all subcommands. Paths are
// checked on use; numeric domains are validated by the engine configs.
struct RunConfig {
  std::string command;

  // Inputs.
  std::string model_path;
  std::string spec_text;
  std::string fsc_path;     // check: evaluate this controller
  std::string policy_path;  // check: evaluate this fixed policy
  std::string dfa_path;     // plan inputs
  std::string truth_path;
  std::string prior_path;
  std::string obs_path;

  // Engine selection and sizes.
  std::string mode = "dual";  // synth: dual | param-scp | robust-fsc
  std::string kind = "grid";  // gen: grid | maze | navigation | reach-avoid
  int k_memory = 1;
  int size = 3;
  double density = 0.25;  // gen reach-avoid obstacle density

  // Scenario parameters.
  int samples = 1000;
  std::optional<double> nu;
  std::optional<double> alpha;

  ScpConfig scp;
  PlannerConfig planner;
  int episodes = 50;

  std::uint64_t seed = 0;
  bool json = false;
  std::string out_path;  // artifact prefix; empty = stdout only
};

// Subcommand entry points (callable in-process). Exit codes: 0 satisfied /
// success, 1 violated / not attained, 2 error.
int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_scenario(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full argument-vector front end (args exclude the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace verisynth
