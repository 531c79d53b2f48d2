#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oposim/heralding.hpp"

namespace oposim {

// Sweep grids; empty vectors fall back to the scenario's own value.
struct SweepSpec {
  std::vector<double> t_over_tau;
  std::vector<double> s;
  std::vector<double> tp_over_tau;
  std::vector<double> z;
  std::vector<int> single_pass;

  bool empty() const {
    return t_over_tau.empty() && s.empty() && tp_over_tau.empty() && z.empty() &&
           single_pass.empty();
  }
};

struct RunSpec {
  std::string mode_function;  // th | cah | eigenmode | file:PATH ('' = unset)
  HeraldScenario::Engine engine = HeraldScenario::Engine::kernels;
};

// Structured scenario configuration with sections [opo], [pump], [chain],
// [window], [run], [sweep]. Keys carry explicit units: *_s seconds,
// *_per_s inverse seconds, *_over_tau multiples of the round trip time.
// Unknown keys are rejected. Defaults follow the reference experimental
// parameter set. A CW pump may give either z or flux_target_per_s, in which
// case z is calibrated at load time.
struct ScenarioFile {
  HeraldScenario scenario;
  RunSpec run;
  SweepSpec sweep;
  std::uint64_t config_hash = 0;

  static ScenarioFile parse_string(const std::string& text);
  static ScenarioFile parse_file(const std::string& path);
};

}
