#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "radau/compare.hpp"
#include "radau/problems.hpp"
#include "radau/solver.hpp"

namespace radau::cli {

struct RunConfig {
  std::string problem = "freeflying";
  std::vector<std::size_t> K{2};
  std::size_t Nk = 5;
  std::vector<Engine> methods{Engine::OC, Engine::EC, Engine::BC, Engine::HD};
  std::optional<Detector> detector;  // sparsity command; both when unset
  SolverOptions solver;
  std::string out = "results";
  bool parallel = false;
  std::uint64_t seed = 20190731;
  double climb_m0 = ClimbConstants::m0_default;
  ClimbTables::Files climb_tables;

  void validate() const;
};

// Fields present in the JSON document override those of `base`.
RunConfig parse_config_json(std::istream& is, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

Detector parse_detector(const std::string& s);
std::string detector_name(Detector d);
std::vector<Engine> parse_methods(const std::string& csv);

// Problem from the config; "scalar" has no optimal control form and throws.
Ocp make_problem(const RunConfig& cfg);

int cmd_sweep(const std::string& out_path, std::ostream& log);
int cmd_sparsity(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);

}  // namespace radau::cli
