#include "radau/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace radau {

double percent_reduction(double xi_oc, double xi_a) {
  if (xi_oc == 0.0) throw std::domain_error("percent_reduction: baseline value is zero");
  return (xi_oc - xi_a) / xi_oc * 100.0;
}

std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::OC: return "OC";
    case Engine::EC: return "EC";
    case Engine::BC: return "BC";
    case Engine::HD: return "HD";
  }
  return "?";
}

Engine parse_engine(std::string_view s) {
  std::string u(s);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (u == "OC") return Engine::OC;
  if (u == "EC") return Engine::EC;
  if (u == "BC") return Engine::BC;
  if (u == "HD") return Engine::HD;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (expected OC, EC, BC or HD)");
}

Detector engine_detector(Engine e) { return e == Engine::OC ? Detector::NaNOverestimate : Detector::Exact; }

Method engine_method(Engine e) {
  switch (e) {
    case Engine::OC:
    case Engine::EC: return Method::CentralFD;
    case Engine::BC: return Method::Bicomplex;
    case Engine::HD: return Method::HyperDual;
  }
  return Method::CentralFD;
}

namespace {

double metric_value(const CompareCell& c, int metric) {
  if (!c.ok) return std::numeric_limits<double>::quiet_NaN();
  const auto& s = c.result.stats;
  switch (metric) {
    case 0: return static_cast<double>(s.I);
    case 1: return s.T;
    default: return s.Phi;
  }
}

constexpr const char* kMetricNames[] = {"I", "T_s", "Phi_ms"};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<CompareRow> comparison_rows(std::span<const Engine> engines, std::span<const CompareCell> cells) {
  std::vector<std::size_t> Ks;
  for (const auto& c : cells) {
    if (std::find(Ks.begin(), Ks.end(), c.K) == Ks.end()) Ks.push_back(c.K);
  }
  const bool has_oc = std::find(engines.begin(), engines.end(), Engine::OC) != engines.end();
  const Engine base = has_oc || engines.empty() ? Engine::OC : engines.front();
  auto find = [&](std::size_t K, Engine e) -> const CompareCell* {
    for (const auto& c : cells) {
      if (c.K == K && c.engine == e) return &c;
    }
    return nullptr;
  };
  std::vector<CompareRow> rows;
  for (std::size_t K : Ks) {
    const CompareCell* b = find(K, base);
    for (int metric = 0; metric < 3; ++metric) {
      CompareRow row;
      row.K = K;
      row.metric = kMetricNames[metric];
      row.value_oc = b ? metric_value(*b, metric) : std::numeric_limits<double>::quiet_NaN();
      auto gamma = [&](Engine e) {
        const CompareCell* c = find(K, e);
        if (!c) return 0.0;
        const double v = metric_value(*c, metric);
        if (std::isnan(v) || std::isnan(row.value_oc) || row.value_oc == 0.0) {
          return std::numeric_limits<double>::quiet_NaN();
        }
        return percent_reduction(row.value_oc, v);
      };
      row.gamma_ec = gamma(Engine::EC);
      row.gamma_bc = gamma(Engine::BC);
      row.gamma_hd = gamma(Engine::HD);
      rows.push_back(row);
    }
  }
  return rows;
}

Comparison compare_methods(const OcpFactory& make, std::span<const Engine> engines, std::span<const std::size_t> Ks,
                           const CompareOptions& opts, const CellCallback& on_cell) {
  Comparison out;
  for (Engine e : engines) {
    if (std::find(out.engines.begin(), out.engines.end(), e) == out.engines.end()) out.engines.push_back(e);
  }
  if (out.engines.empty()) throw std::invalid_argument("compare_methods: no methods given");
  if (Ks.empty()) throw std::invalid_argument("compare_methods: no meshes given");
  for (std::size_t K : Ks) {
    if (K == 0) throw std::invalid_argument("compare_methods: K must be at least 1");
    for (Engine e : out.engines) {
      CompareCell c;
      c.K = K;
      c.engine = e;
      out.cells.push_back(std::move(c));
    }
  }
  if (opts.Nk == 0) throw std::invalid_argument("compare_methods: Nk must be at least 1");

  auto run = [&](CompareCell& cell) {
    try {
      NlpProblem nlp(make(), {Mesh::uniform(cell.K, opts.Nk)}, engine_detector(cell.engine));
      nlp.set_execution(opts.assembly);
      TranscribedNlp t(nlp, StepRule::defaults(engine_method(cell.engine)));
      cell.result = solve(t, opts.solver);
      cell.ok = true;
      if (on_cell) on_cell(cell, nlp);
    } catch (const std::exception& ex) {
      cell.ok = false;
      cell.error = ex.what();
      cell.result.stats.status = std::string("error: ") + ex.what();
    }
  };

  const auto n = static_cast<long>(out.cells.size());
  if (opts.parallel_cells) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) run(out.cells[static_cast<std::size_t>(i)]);
  } else {
    for (long i = 0; i < n; ++i) run(out.cells[static_cast<std::size_t>(i)]);
  }
  out.rows = comparison_rows(out.engines, out.cells);
  return out;
}

void write_comparison_csv(std::ostream& os, std::span<const CompareRow> rows) {
  os << "K,metric,value_OC,gamma_EC,gamma_BC,gamma_HD\n";
  for (const auto& r : rows) {
    os << r.K << ',' << r.metric << ',' << fmt(r.value_oc) << ',' << fmt(r.gamma_ec) << ',' << fmt(r.gamma_bc) << ','
       << fmt(r.gamma_hd) << '\n';
  }
}

std::vector<CompareRow> read_comparison_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "K,metric,value_OC,gamma_EC,gamma_BC,gamma_HD") {
    throw std::runtime_error("comparison CSV: unexpected header");
  }
  std::vector<CompareRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw std::runtime_error("comparison CSV: expected 6 fields in '" + line + "'");
    CompareRow r;
    r.K = static_cast<std::size_t>(std::stoul(f[0]));
    r.metric = f[1];
    r.value_oc = parse_double(f[2]);
    r.gamma_ec = parse_double(f[3]);
    r.gamma_bc = parse_double(f[4]);
    r.gamma_hd = parse_double(f[5]);
    rows.push_back(r);
  }
  return rows;
}

void write_cells_csv(std::ostream& os, std::span<const CompareCell> cells) {
  os << "K,method,I,T_s,Phi_ms,objective,converged,status\n";
  for (const auto& c : cells) {
    const auto& s = c.result.stats;
    std::string status = s.status;
    std::replace(status.begin(), status.end(), ',', ';');
    os << c.K << ',' << engine_name(c.engine) << ',' << s.I << ',' << fmt(s.T) << ',' << fmt(s.Phi) << ','
       << fmt(c.ok ? c.result.objective : std::numeric_limits<double>::quiet_NaN()) << ',' << (s.converged ? 1 : 0)
       << ',' << status << '\n';
  }
}

SolutionTable solution_table(const NlpProblem& nlp, const SolveResult& result) {
  const auto& ocp = nlp.ocp();
  std::size_t ny = 0;
  std::size_t nu = 0;
  for (const auto& ph : ocp.phases) {
    ny = std::max(ny, ph.n_y);
    nu = std::max(nu, ph.n_u);
  }
  SolutionTable t;
  t.objective = result.objective;
  t.header = {"phase", "t"};
  for (std::size_t k = 0; k < ny; ++k) t.header.push_back("y_" + std::to_string(k + 1));
  for (std::size_t k = 0; k < nu; ++k) t.header.push_back("u_" + std::to_string(k + 1));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t p = 0; p < ocp.phases.size(); ++p) {
    const auto& ph = ocp.phases[p];
    const auto& L = nlp.layout().phases[p];
    const auto times = phase_times(nlp, p, result.x);
    for (std::size_t i = 0; i <= L.n; ++i) {
      std::vector<double> row{static_cast<double>(p + 1), times[i]};
      for (std::size_t k = 0; k < ny; ++k) row.push_back(k < ph.n_y ? result.x[L.Y(i, k)] : nan);
      for (std::size_t k = 0; k < nu; ++k) row.push_back(k < ph.n_u && i < L.n ? result.x[L.U(i, k)] : nan);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

void write_solution_csv(std::ostream& os, const SolutionTable& table) {
  os << "# objective=" << fmt(table.objective) << '\n';
  for (std::size_t k = 0; k < table.header.size(); ++k) os << (k ? "," : "") << table.header[k];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ',';
      os << (k == 0 ? std::to_string(static_cast<long>(row[k])) : fmt(row[k]));
    }
    os << '\n';
  }
}

SolutionTable read_solution_csv(std::istream& is) {
  SolutionTable t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# objective=", 0) != 0) {
    throw std::runtime_error("solution CSV: missing objective line");
  }
  t.objective = parse_double(line.substr(12));
  if (!std::getline(is, line)) throw std::runtime_error("solution CSV: missing header");
  t.header = split(line);
  if (t.header.size() < 2 || t.header[0] != "phase" || t.header[1] != "t") {
    throw std::runtime_error("solution CSV: unexpected header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != t.header.size()) throw std::runtime_error("solution CSV: ragged row");
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(parse_double(s));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace radau
