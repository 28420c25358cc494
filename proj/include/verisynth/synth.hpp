#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "verisynth/checker.hpp"
#include "verisynth/model.hpp"
#include "verisynth/scp.hpp"

namespace verisynth {

struct SynthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validates that a model with parameters is usable for synthesis: entries are
// point or affine (no intervals), rows sum to one identically, and every
// affine entry stays >= eps_graph over the whole parameter box, so no
// instantiation in the box can change the underlying graph.
void validate_parametric(const Model& pm, double eps_graph);

// Evaluates every affine entry at the given parameter values (which must lie
// inside the declared ranges) and returns the resulting parameter-free model.
Model instantiate(const Model& pm,
                  const std::map<std::string, double>& values);

struct SynthStep {
  int iteration = 0;
  double value = 0.0;   // independently checked value of the candidate
  double delta = 0.0;   // trust-region size when the candidate was proposed
  bool accepted = false;
};

struct SynthReport {
  enum class Status { satisfied, no_improvement, max_iters };
  Status status = Status::no_improvement;
  double certified_value = 0.0;  // reproduced by re-checking the artifact
  int iterations = 0;
  double final_delta = 0.0;
  std::map<std::string, double> parameters;  // parameter synthesis output
  std::optional<Fsc> fsc;                    // controller synthesis output
  std::optional<Policy> policy;              // product-level policy behind fsc
  std::vector<SynthStep> steps;

  std::string status_str() const;
  std::string to_json() const;
  std::string trace_csv() const;  // iteration,value,delta,accepted
};

// Sequential convex programming over the parameter box: linearize the
// bilinear parameter/value products at the incumbent, solve the penalized LP
// inside a trust region, certify the proposed instantiation with the checker,
// and accept only strict improvement. Supports reachability objectives; for
// models with real action choices only the safety direction (bounding the
// maximizing policy, reach <= lambda) is available.
SynthReport scp_param_synthesis(const Model& pm, const Spec& spec,
                                const ScpConfig& cfg = {});

// Robust controller synthesis for uncertain POMDPs: build the k-memory
// product, reduce it to the simple binary form, then run SCP over the
// observation-based decision probabilities. Action-choice rows are
// linearized; uncertain rows enter as cutting planes at nature's current
// worst-case vertex. Every candidate is folded back to a k-node controller
// and certified on the original model. warm_start (same node count) seeds
// the initial decision probabilities; default is uniform.
SynthReport robust_fsc_synthesis(const Model& model, int k, const Spec& spec,
                                 const ScpConfig& cfg = {},
                                 const Fsc* warm_start = nullptr);

}  // namespace verisynth
