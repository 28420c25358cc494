#pragma once

#include <string>

#include "verisynth/model.hpp"

namespace verisynth {

// JSON (de)serialization for every artifact the tools read or write. Parsers
// throw ModelError carrying the JSON field path (or byte offset for syntax
// errors); every parsed object is validated before being returned.

Model parse_model(const std::string& text);
std::string serialize_model(const Model& m);

Dfa parse_dfa(const std::string& text);
std::string serialize_dfa(const Dfa& d);

Fsc parse_fsc(const std::string& text, const Model& m);
std::string serialize_fsc(const Fsc& f, const Model& m);

Policy parse_policy(const std::string& text, const Model& m);
std::string serialize_policy(const Policy& p, const Model& m);

BeliefLabeling parse_belief(const std::string& text);
std::string serialize_belief(const BeliefLabeling& b);

ObservationModel parse_obs_model(const std::string& text);
std::string serialize_obs_model(const ObservationModel& om);

// Ground-truth labelings reuse the model "labels" table keyed by state index:
//   {"props":[...],"states":N,"labels":{"0":["prop"],...}}
struct GroundTruth {
  std::vector<std::string> props;
  int num_states = 0;
  std::vector<std::vector<int>> labels;  // per state, indices into props
  bool holds(int s, int prop) const;
  bool operator==(const GroundTruth&) const = default;
};
GroundTruth parse_ground_truth(const std::string& text);
std::string serialize_ground_truth(const GroundTruth& g);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace verisynth
