#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "radau/derivest.hpp"

namespace radau::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  if (problem.empty()) throw std::invalid_argument("config: problem is empty");
  if (K.empty()) throw std::invalid_argument("config: K list is empty");
  for (auto k : K) {
    if (k < 1) throw std::invalid_argument("config: K must be at least 1");
  }
  if (Nk < 1) throw std::invalid_argument("config: Nk must be at least 1");
  if (methods.empty()) throw std::invalid_argument("config: method list is empty");
  if (!(solver.tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
  if (solver.max_iter == 0) throw std::invalid_argument("config: max_iter must be positive");
  if (!(climb_m0 > 0.0)) throw std::invalid_argument("config: climb m0 must be positive");
}

Detector parse_detector(const std::string& s) {
  if (s == "exact") return Detector::Exact;
  if (s == "nan" || s == "overestimate") return Detector::NaNOverestimate;
  throw std::invalid_argument("unknown detector '" + s + "' (expected exact or nan)");
}

std::string detector_name(Detector d) { return d == Detector::Exact ? "exact" : "nan"; }

std::vector<Engine> parse_methods(const std::string& csv) {
  std::vector<Engine> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_engine(item));
  }
  return out;
}

RunConfig parse_config_json(std::istream& is, RunConfig cfg) {
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  static const std::vector<std::string> known{"problem", "K",    "Nk",   "methods",         "detector", "tol",
                                              "max_iter", "out", "parallel", "constr_viol_tol", "seed", "climb"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  try {
    if (j.contains("problem")) cfg.problem = j["problem"].get<std::string>();
    if (j.contains("K")) {
      cfg.K.clear();
      if (j["K"].is_array()) {
        for (const auto& v : j["K"]) cfg.K.push_back(v.get<std::size_t>());
      } else {
        cfg.K.push_back(j["K"].get<std::size_t>());
      }
    }
    if (j.contains("Nk")) cfg.Nk = j["Nk"].get<std::size_t>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& v : j["methods"]) cfg.methods.push_back(parse_engine(v.get<std::string>()));
    }
    if (j.contains("detector")) {
      const auto d = j["detector"].get<std::string>();
      if (d == "both") {
        cfg.detector.reset();
      } else {
        cfg.detector = parse_detector(d);
      }
    }
    if (j.contains("tol")) cfg.solver.tol = j["tol"].get<double>();
    if (j.contains("constr_viol_tol")) cfg.solver.constr_viol_tol = j["constr_viol_tol"].get<double>();
    if (j.contains("max_iter")) cfg.solver.max_iter = j["max_iter"].get<std::size_t>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("parallel")) cfg.parallel = j["parallel"].get<bool>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("climb")) {
      const auto& c = j["climb"];
      if (c.contains("m0")) cfg.climb_m0 = c["m0"].get<double>();
      if (c.contains("tables")) {
        const auto& t = c["tables"];
        auto get = [&](const char* k, std::string& dst) {
          if (t.contains(k)) dst = t[k].get<std::string>();
        };
        get("rho", cfg.climb_tables.rho);
        get("sound", cfg.climb_tables.sound);
        get("cl_alpha", cfg.climb_tables.cl_alpha);
        get("cd0", cfg.climb_tables.cd0);
        get("eta", cfg.climb_tables.eta);
        get("thrust", cfg.climb_tables.thrust);
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config_json(in, std::move(base));
}

Ocp make_problem(const RunConfig& cfg) {
  Ocp ocp;
  if (cfg.problem == "climb") {
    ocp = min_time_climb(ClimbTables::load(cfg.climb_tables, ClimbTables::synthetic()), cfg.climb_m0);
  } else if (cfg.problem == "scalar") {
    throw std::invalid_argument("problem 'scalar' is only available to the sweep command");
  } else {
    ocp = problem_by_name(cfg.problem);
  }
  ocp.probe_seed = cfg.seed;
  return ocp;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

std::string cell_stem(const RunConfig& cfg, std::size_t K, Engine e) {
  return cfg.problem + "_K" + std::to_string(K) + "_" + std::string(engine_name(e));
}

}  // namespace

int cmd_sweep(const std::string& out_path, std::ostream& log) {
  const auto study = example_scalar();
  const auto grid = log_grid(0.0, -15.0, 31);
  const auto rows = error_sweep(study.fn, study.f1, study.f2, 0.5, grid);
  auto f = open_out(out_path);
  write_sweep_csv(f, rows);
  if (!f) throw std::runtime_error("write failed for '" + out_path + "'");
  log << "wrote " << rows.size() << " rows to " << out_path << '\n';
  return 0;
}

int cmd_sparsity(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::vector<Detector> dets;
  if (cfg.detector) {
    dets.push_back(*cfg.detector);
  } else {
    dets = {Detector::NaNOverestimate, Detector::Exact};
  }
  for (std::size_t K : cfg.K) {
    for (Detector d : dets) {
      NlpProblem nlp(make_problem(cfg), {Mesh::uniform(K, cfg.Nk)}, d);
      for (const auto& w : nlp.warnings()) log << "warning: " << w << '\n';
      const std::string stem = cfg.problem + "_K" + std::to_string(K) + "_" + detector_name(d);
      const fs::path dir(cfg.out);
      auto fj = open_out(dir / (stem + "_jacobian.txt"));
      write_pattern(fj, nlp.jacobian_pattern());
      auto fh = open_out(dir / (stem + "_hessian.txt"));
      write_pattern(fh, nlp.hessian_pattern());
      log << cfg.problem << " K=" << K << " detector=" << detector_name(d) << " n=" << nlp.n_z()
          << " m=" << nlp.n_g() << " jacobian_nnz=" << nlp.jacobian_pattern().nnz()
          << " hessian_nnz=" << nlp.hessian_pattern().nnz() << '\n';
    }
  }
  return 0;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const Engine e = cfg.methods.front();
  bool all = true;
  for (std::size_t K : cfg.K) {
    NlpProblem nlp(make_problem(cfg), {Mesh::uniform(K, cfg.Nk)}, engine_detector(e));
    nlp.set_execution(cfg.parallel ? Execution::Parallel : Execution::Serial);
    TranscribedNlp t(nlp, StepRule::defaults(engine_method(e)));
    const auto r = solve(t, cfg.solver);
    all = all && r.stats.converged;
    const fs::path file = fs::path(cfg.out) / (cell_stem(cfg, K, e) + ".csv");
    auto f = open_out(file);
    write_solution_csv(f, solution_table(nlp, r));
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s K=%zu method=%s objective=%.12g I=%zu T=%.3fs Phi=%.3fms status=%s\n",
                  cfg.problem.c_str(), K, std::string(engine_name(e)).c_str(), r.objective, r.stats.I, r.stats.T,
                  r.stats.Phi, r.stats.status.c_str());
    log << buf;
  }
  return all ? 0 : 2;
}

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const Ocp proto = make_problem(cfg);
  CompareOptions opts;
  opts.Nk = cfg.Nk;
  opts.solver = cfg.solver;
  opts.parallel_cells = cfg.parallel;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::mutex io;
  std::vector<std::string> write_errors;
  auto on_cell = [&](const CompareCell& c, const NlpProblem& nlp) {
    const fs::path file = dir / (cell_stem(cfg, c.K, c.engine) + ".csv");
    std::ofstream f(file);
    if (f) write_solution_csv(f, solution_table(nlp, c.result));
    if (!f) {
      std::lock_guard lock(io);
      write_errors.push_back(file.string());
    }
  };
  const auto cmp = compare_methods([&] { return proto; }, cfg.methods, cfg.K, opts, on_cell);
  if (!write_errors.empty()) throw std::runtime_error("cannot write '" + write_errors.front() + "'");

  auto fc = open_out(dir / (cfg.problem + "_comparison.csv"));
  write_comparison_csv(fc, cmp.rows);
  auto fs_ = open_out(dir / (cfg.problem + "_cells.csv"));
  write_cells_csv(fs_, cmp.cells);

  bool all = true;
  for (const auto& c : cmp.cells) {
    all = all && c.ok && c.result.stats.converged;
    char buf[256];
    std::snprintf(buf, sizeof buf, "K=%-3zu %s objective=%.12g I=%zu T=%.3fs Phi=%.3fms %s\n", c.K,
                  std::string(engine_name(c.engine)).c_str(), c.result.objective, c.result.stats.I, c.result.stats.T,
                  c.result.stats.Phi, c.ok ? c.result.stats.status.c_str() : c.error.c_str());
    log << buf;
  }
  log << "K    metric  value_OC        gamma_EC  gamma_BC  gamma_HD\n";
  for (const auto& r : cmp.rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4zu %-7s %-15.6g %9.2f %9.2f %9.2f\n", r.K, r.metric.c_str(), r.value_oc,
                  r.gamma_ec, r.gamma_bc, r.gamma_hd);
    log << buf;
  }
  return all ? 0 : 2;
}

}  // namespace radau::cli
