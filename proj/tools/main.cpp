#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "run_config.hpp"

using namespace radau;
using namespace radau::cli;

namespace {

struct Flags {
  std::string config, problem, methods, detector, out;
  std::vector<std::size_t> K;
  std::size_t Nk = 5;
  double tol = 1e-7;
  std::size_t max_iter = 500;
  std::uint64_t seed = 0;
  double m0 = 0.0;
  bool parallel = false;
};

void add_run_flags(CLI::App* sub, Flags& f, bool with_methods, bool with_detector) {
  sub->add_option("--config", f.config, "JSON run configuration (flags override it)");
  sub->add_option("--problem", f.problem, "freeflying | climb | station | linear | lq");
  sub->add_option("--K", f.K, "mesh interval counts, e.g. --K 2 4")->delimiter(',');
  sub->add_option("--Nk", f.Nk, "collocation points per interval")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "sparsity probe seed");
  sub->add_option("--m0", f.m0, "initial mass for the climb problem, kg");
  if (with_methods) {
    sub->add_option("--methods", f.methods, "comma-separated subset of OC,EC,BC,HD");
    sub->add_option("--tol", f.tol, "KKT tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", f.max_iter, "iteration limit")->check(CLI::PositiveNumber);
    sub->add_flag("--parallel", f.parallel, "run cells (compare) or assembly (solve) with OpenMP");
  }
  if (with_detector) sub->add_option("--detector", f.detector, "exact | nan | both");
}

RunConfig build_config(CLI::App* sub, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_config_file(f.config, cfg);
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--problem")) cfg.problem = f.problem;
  if (given("--K")) cfg.K = f.K;
  if (given("--Nk")) cfg.Nk = f.Nk;
  if (given("--out")) cfg.out = f.out;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--m0")) cfg.climb_m0 = f.m0;
  if (sub->get_option_no_throw("--methods") && given("--methods")) cfg.methods = parse_methods(f.methods);
  if (sub->get_option_no_throw("--tol") && given("--tol")) cfg.solver.tol = f.tol;
  if (sub->get_option_no_throw("--max-iter") && given("--max-iter")) cfg.solver.max_iter = f.max_iter;
  if (sub->get_option_no_throw("--parallel") && given("--parallel")) cfg.parallel = f.parallel;
  if (sub->get_option_no_throw("--detector") && given("--detector")) {
    if (f.detector == "both") {
      cfg.detector.reset();
    } else {
      cfg.detector = parse_detector(f.detector);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LGR collocation with interchangeable derivative engines"};
  app.require_subcommand(1);

  std::string sweep_out = "sweep.csv";
  auto* sweep = app.add_subcommand("sweep", "derivative error sweep on the scalar study function");
  sweep->add_option("--out", sweep_out, "output CSV path");

  Flags sp_flags, solve_flags, cmp_flags;
  auto* sparsity = app.add_subcommand("sparsity", "write Jacobian and Hessian sparsity patterns");
  add_run_flags(sparsity, sp_flags, false, true);
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem with the first listed method");
  add_run_flags(solve_cmd, solve_flags, true, false);
  auto* compare = app.add_subcommand("compare", "method comparison matrix");
  add_run_flags(compare, cmp_flags, true, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cmd_sweep(sweep_out, std::cout);
    if (sparsity->parsed()) return cmd_sparsity(build_config(sparsity, sp_flags), std::cout);
    if (solve_cmd->parsed()) return cmd_solve(build_config(solve_cmd, solve_flags), std::cout);
    if (compare->parsed()) return cmd_compare(build_config(compare, cmp_flags), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
