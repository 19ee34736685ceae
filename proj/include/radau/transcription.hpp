#pragma once

// Multi-phase optimal control problems and their LGR transcription into a
// sparse NLP.
//
// Phase callbacks take inputs [y (n_y), u (n_u), t, s (n_s)].  The endpoint
// functions (objective, events) take, for every phase in order,
// [y(t0) (n_y), t0, y(tf) (n_y), tf, q (n_q)] followed by s (n_s).
//
// Decision vector, per phase: Y column-major ((N+1) x n_y), U column-major
// (N x n_u), t0, tf, Q (n_q); static parameters s last.
// Constraints, per phase: defects column-major (N x n_y), paths column-major
// (N x n_c), integral residuals (n_q); events (n_b) last.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "radau/derivest.hpp"
#include "radau/functions.hpp"
#include "radau/lgr.hpp"
#include "radau/sparsity.hpp"

namespace radau {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct OcpPhase {
  std::string name;
  std::size_t n_y = 0;
  std::size_t n_u = 0;
  std::size_t n_q = 0;
  std::size_t n_c = 0;

  VectorFunction dynamics;   // -> n_y rates
  VectorFunction path;       // -> n_c values
  VectorFunction integrand;  // -> n_q values

  std::vector<double> y_lower, y_upper;
  std::vector<double> y0_lower, y0_upper;
  std::vector<double> yf_lower, yf_upper;
  std::vector<double> u_lower, u_upper;
  std::vector<double> q_lower, q_upper;
  std::vector<double> c_lower, c_upper;
  double t0_lower = 0.0, t0_upper = 0.0;
  double tf_lower = 1.0, tf_upper = 1.0;

  // Typical magnitudes for solver scaling; empty falls back to the bounds.
  std::vector<double> y_scale, u_scale, q_scale;

  // Initial guess; empty vectors fall back to defaults.
  std::vector<double> guess_y0, guess_yf, guess_u, guess_q;
  double guess_t0 = kInf;
  double guess_tf = kInf;

  [[nodiscard]] std::size_t n_in(std::size_t n_s) const { return n_y + n_u + 1 + n_s; }
  void validate(std::size_t n_s) const;
};

struct Ocp {
  std::vector<OcpPhase> phases;
  std::size_t n_s = 0;
  std::size_t n_b = 0;
  VectorFunction objective;  // endpoint layout -> 1
  VectorFunction events;     // endpoint layout -> n_b
  std::vector<double> s_lower, s_upper, guess_s;
  std::vector<double> b_lower, b_upper;
  std::uint64_t probe_seed = 20190731;  // sparsity probe points

  [[nodiscard]] std::size_t endpoint_size() const;
  void validate() const;
};

struct PhaseLayout {
  std::size_t n = 0;  // collocation points N
  std::size_t y = 0, u = 0, t0 = 0, tf = 0, q = 0;
  std::size_t defects = 0, paths = 0, rho = 0;
  MeshRules rules;

  [[nodiscard]] std::size_t Y(std::size_t i, std::size_t k) const { return y + k * (n + 1) + i; }
  [[nodiscard]] std::size_t U(std::size_t i, std::size_t k) const { return u + k * n + i; }
  [[nodiscard]] std::size_t Q(std::size_t k) const { return q + k; }
  [[nodiscard]] std::size_t defect(std::size_t i, std::size_t k) const { return defects + k * n + i; }
  [[nodiscard]] std::size_t path_row(std::size_t i, std::size_t c) const { return paths + c * n + i; }
};

struct NlpLayout {
  std::vector<PhaseLayout> phases;
  std::size_t s = 0;
  std::size_t n_z = 0;
  std::size_t events = 0;
  std::size_t n_g = 0;
};

NlpLayout build_layout(const Ocp& ocp, std::span<const Mesh> meshes);

enum class Detector { NaNOverestimate, Exact };
enum class Execution { Serial, Parallel };

class NlpProblem {
 public:
  // One mesh per phase, or a single mesh shared by every phase.
  NlpProblem(Ocp ocp, std::vector<Mesh> meshes, Detector detector);

  [[nodiscard]] const Ocp& ocp() const { return ocp_; }
  [[nodiscard]] const NlpLayout& layout() const { return layout_; }
  [[nodiscard]] Detector detector() const { return detector_; }
  [[nodiscard]] std::size_t n_z() const { return layout_.n_z; }
  [[nodiscard]] std::size_t n_g() const { return layout_.n_g; }
  [[nodiscard]] const std::vector<double>& z_lower() const { return z_lower_; }
  [[nodiscard]] const std::vector<double>& z_upper() const { return z_upper_; }
  [[nodiscard]] const std::vector<double>& g_lower() const { return g_lower_; }
  [[nodiscard]] const std::vector<double>& g_upper() const { return g_upper_; }
  [[nodiscard]] const JacobianPattern& jacobian_pattern() const { return jac_pattern_; }
  [[nodiscard]] const HessianPattern& hessian_pattern() const { return hess_pattern_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

  // Phase scale hints where given, else max(|lower|, |upper|) for variables
  // with two finite bounds, else 1.  All ones when scaling is off.
  [[nodiscard]] std::vector<double> variable_scales() const;
  void set_bound_scaling(bool on) { bound_scaling_ = on; }
  [[nodiscard]] bool bound_scaling() const { return bound_scaling_; }

  void set_execution(Execution e) { execution_ = e; }
  [[nodiscard]] Execution execution() const { return execution_; }

  [[nodiscard]] std::vector<double> initial_guess() const;
  [[nodiscard]] std::vector<double> endpoint_vector(std::span<const double> z) const;

  double objective(std::span<const double> z) const;
  void constraints(std::span<const double> z, std::span<double> g) const;

  void objective_gradient(std::span<const double> z, std::span<double> grad, const StepRule& rule) const;
  // Values aligned with jacobian_pattern().entries().
  void jacobian_values(std::span<const double> z, std::span<double> values, const StepRule& rule) const;
  // Lower triangle of sigma * Hess(objective) + sum lambda_r * Hess(g_r).
  void hessian_values(std::span<const double> z, double sigma, std::span<const double> lambda,
                      std::span<double> values, const StepRule& rule) const;

 private:
  struct LocalTerm {
    std::size_t slot;    // index into the global value array
    std::size_t local;   // index into the local value array
    bool weighted;       // multiply by the quadrature weight of the point
  };
  struct PointMap {
    VectorFunction fn;
    double weight = 0.0;
  };
  struct PhaseData {
    std::vector<PointMap> points;
    JacobianPattern local_jac;
    HessianPattern local_hess;
    std::vector<std::vector<LocalTerm>> jac_terms;   // per point
    std::vector<std::vector<LocalTerm>> hess_terms;  // per point
  };

  VectorFunction make_local(const OcpPhase& phase, double tau) const;
  VectorFunction make_endpoint() const;
  void local_input(std::size_t p, std::size_t i, std::span<const double> z, std::span<double> x) const;
  [[nodiscard]] std::size_t local_to_global(std::size_t p, std::size_t i, std::size_t l) const;
  [[nodiscard]] std::size_t endpoint_to_global(std::size_t e) const;
  [[nodiscard]] std::size_t local_row_to_global(std::size_t p, std::size_t i, std::size_t r, bool& weighted) const;
  void detect_patterns();

  Ocp ocp_;
  NlpLayout layout_;
  Detector detector_;
  bool bound_scaling_ = true;
  Execution execution_ = Execution::Serial;

  std::vector<double> z_lower_, z_upper_, g_lower_, g_upper_;
  std::vector<PhaseData> phase_data_;
  VectorFunction endpoint_;  // [objective, events]
  JacobianPattern endpoint_jac_;
  HessianPattern endpoint_hess_;
  std::vector<LocalTerm> endpoint_jac_terms_;  // event rows only
  std::vector<LocalTerm> endpoint_grad_terms_;  // objective row, slot is a z index
  std::vector<LocalTerm> endpoint_hess_terms_;

  JacobianPattern jac_pattern_;
  HessianPattern hess_pattern_;
  std::vector<double> jac_constant_;
  std::vector<std::string> warnings_;
};

// Physical time at each of the N + 1 support points of phase p.
std::vector<double> phase_times(const NlpProblem& nlp, std::size_t p, std::span<const double> z);

}  // namespace radau
