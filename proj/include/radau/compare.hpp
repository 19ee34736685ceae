#pragma once

// Method comparison: solve one problem family on several meshes with several
// derivative engines and tabulate iterations, time and derivative time per
// iteration, with percent reductions relative to the over-estimated
// finite-difference baseline.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radau/solver.hpp"
#include "radau/transcription.hpp"

namespace radau {

// (xi_oc - xi_a) / xi_oc * 100
double percent_reduction(double xi_oc, double xi_a);

// OC: central FD with NaN over-estimated sparsity; EC: central FD with exact
// sparsity; BC: bicomplex-step; HD: hyper-dual (both with exact sparsity).
enum class Engine { OC, EC, BC, HD };

std::string_view engine_name(Engine e);
Engine parse_engine(std::string_view s);
Detector engine_detector(Engine e);
Method engine_method(Engine e);

struct CompareOptions {
  std::size_t Nk = 5;
  SolverOptions solver;
  bool parallel_cells = false;  // run (mesh, engine) cells concurrently
  Execution assembly = Execution::Serial;
};

struct CompareCell {
  std::size_t K = 0;
  Engine engine = Engine::OC;
  bool ok = false;  // solve ran to completion (converged or not)
  std::string error;
  SolveResult result;
};

struct CompareRow {
  std::size_t K = 0;
  std::string metric;  // I, T_s, Phi_ms
  double value_oc = 0.0;
  double gamma_ec = 0.0;
  double gamma_bc = 0.0;
  double gamma_hd = 0.0;
};

struct Comparison {
  std::vector<Engine> engines;  // deduplicated, in first-seen order
  std::vector<CompareCell> cells;  // K-major, engine-minor
  std::vector<CompareRow> rows;
};

using OcpFactory = std::function<Ocp()>;

// Called after each cell with the transcription used for it.
using CellCallback = std::function<void(const CompareCell&, const NlpProblem&)>;

Comparison compare_methods(const OcpFactory& make, std::span<const Engine> engines, std::span<const std::size_t> Ks,
                           const CompareOptions& opts, const CellCallback& on_cell = {});

// Gamma rows from cells.  The baseline is OC when present, otherwise the
// first engine; engines that were not run get Gamma = 0.
std::vector<CompareRow> comparison_rows(std::span<const Engine> engines, std::span<const CompareCell> cells);

void write_comparison_csv(std::ostream& os, std::span<const CompareRow> rows);
std::vector<CompareRow> read_comparison_csv(std::istream& is);

// One line per cell: K, engine, I, T_s, Phi_ms, objective, converged, status.
void write_cells_csv(std::ostream& os, std::span<const CompareCell> cells);

// Solution file: "# objective=<value>" then "phase,t,y_1..,u_1.." with one row
// per state support point; controls at the terminal point are nan.
struct SolutionTable {
  double objective = 0.0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // first column is the phase index
};

SolutionTable solution_table(const NlpProblem& nlp, const SolveResult& result);
void write_solution_csv(std::ostream& os, const SolutionTable& table);
SolutionTable read_solution_csv(std::istream& is);

}  // namespace radau
