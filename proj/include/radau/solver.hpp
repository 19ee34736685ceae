#pragma once

// Primal-dual interior-point solver for
//
//   min f(x)  s.t.  g_L <= g(x) <= g_U,  x_L <= x <= x_U
//
// with slacks for inequality rows, an l1 merit line search and an
// inertia-corrected sparse LDL^T factorisation of the KKT system.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radau/derivest.hpp"
#include "radau/sparsity.hpp"
#include "radau/transcription.hpp"

namespace radau {

class NlpInterface {
 public:
  virtual ~NlpInterface() = default;

  [[nodiscard]] virtual std::size_t n() const = 0;
  [[nodiscard]] virtual std::size_t m() const = 0;
  [[nodiscard]] virtual const std::vector<double>& x_lower() const = 0;
  [[nodiscard]] virtual const std::vector<double>& x_upper() const = 0;
  [[nodiscard]] virtual const std::vector<double>& g_lower() const = 0;
  [[nodiscard]] virtual const std::vector<double>& g_upper() const = 0;
  [[nodiscard]] virtual std::vector<double> initial_guess() const = 0;
  [[nodiscard]] virtual const JacobianPattern& jacobian_pattern() const = 0;
  [[nodiscard]] virtual const HessianPattern& hessian_pattern() const = 0;

  virtual double objective(std::span<const double> x) const = 0;
  virtual void constraints(std::span<const double> x, std::span<double> g) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> grad) const = 0;
  virtual void jacobian(std::span<const double> x, std::span<double> values) const = 0;
  virtual void hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                       std::span<double> values) const = 0;

  // Typical magnitudes of the variables; the solver iterates on x / scale.
  // Empty means unscaled.
  [[nodiscard]] virtual std::vector<double> variable_scales() const { return {}; }
};

// Transcribed optimal control problem with a fixed derivative engine.
class TranscribedNlp final : public NlpInterface {
 public:
  TranscribedNlp(const NlpProblem& nlp, StepRule rule) : nlp_(nlp), rule_(rule) {}

  [[nodiscard]] std::size_t n() const override { return nlp_.n_z(); }
  [[nodiscard]] std::size_t m() const override { return nlp_.n_g(); }
  [[nodiscard]] const std::vector<double>& x_lower() const override { return nlp_.z_lower(); }
  [[nodiscard]] const std::vector<double>& x_upper() const override { return nlp_.z_upper(); }
  [[nodiscard]] const std::vector<double>& g_lower() const override { return nlp_.g_lower(); }
  [[nodiscard]] const std::vector<double>& g_upper() const override { return nlp_.g_upper(); }
  [[nodiscard]] std::vector<double> initial_guess() const override { return nlp_.initial_guess(); }
  [[nodiscard]] const JacobianPattern& jacobian_pattern() const override { return nlp_.jacobian_pattern(); }
  [[nodiscard]] const HessianPattern& hessian_pattern() const override { return nlp_.hessian_pattern(); }
  [[nodiscard]] std::vector<double> variable_scales() const override { return nlp_.variable_scales(); }

  double objective(std::span<const double> x) const override { return nlp_.objective(x); }
  void constraints(std::span<const double> x, std::span<double> g) const override { nlp_.constraints(x, g); }
  void gradient(std::span<const double> x, std::span<double> grad) const override {
    nlp_.objective_gradient(x, grad, rule_);
  }
  void jacobian(std::span<const double> x, std::span<double> values) const override {
    nlp_.jacobian_values(x, values, rule_);
  }
  void hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
               std::span<double> values) const override {
    nlp_.hessian_values(x, sigma, lambda, values, rule_);
  }

 private:
  const NlpProblem& nlp_;
  StepRule rule_;
};

// Small dense-pattern problem from generic callables, differentiated with
// hyper-dual numbers.  Used for analytic test programs.
class FunctionNlp final : public NlpInterface {
 public:
  FunctionNlp(VectorFunction objective, VectorFunction constraints, std::vector<double> x_lower,
              std::vector<double> x_upper, std::vector<double> g_lower, std::vector<double> g_upper,
              std::vector<double> x0);

  [[nodiscard]] std::size_t n() const override { return x_lower_.size(); }
  [[nodiscard]] std::size_t m() const override { return g_lower_.size(); }
  [[nodiscard]] const std::vector<double>& x_lower() const override { return x_lower_; }
  [[nodiscard]] const std::vector<double>& x_upper() const override { return x_upper_; }
  [[nodiscard]] const std::vector<double>& g_lower() const override { return g_lower_; }
  [[nodiscard]] const std::vector<double>& g_upper() const override { return g_upper_; }
  [[nodiscard]] std::vector<double> initial_guess() const override { return x0_; }
  [[nodiscard]] const JacobianPattern& jacobian_pattern() const override { return jac_; }
  [[nodiscard]] const HessianPattern& hessian_pattern() const override { return hess_; }

  double objective(std::span<const double> x) const override;
  void constraints(std::span<const double> x, std::span<double> g) const override;
  void gradient(std::span<const double> x, std::span<double> grad) const override;
  void jacobian(std::span<const double> x, std::span<double> values) const override;
  void hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
               std::span<double> values) const override;

 private:
  VectorFunction f_;
  VectorFunction g_;
  VectorFunction lag_;  // [f, g]
  std::vector<double> x_lower_, x_upper_, g_lower_, g_upper_, x0_;
  JacobianPattern f_grad_;
  JacobianPattern jac_;
  HessianPattern hess_;
};

struct SolverOptions {
  double tol = 1e-7;
  double constr_viol_tol = 1e-7;  // unscaled, checked in addition to tol
  std::size_t max_iter = 500;
  double mu_init = 0.1;
  double mu_linear_decrease = 0.2;
  double mu_superlinear_power = 1.5;
  double barrier_tol_factor = 10.0;
  double tau_min = 0.99;
  double bound_push = 1e-2;
  double bound_frac = 1e-2;
  double scaling_threshold = 100.0;
  bool equilibrate_rows = true;  // unit max-norm rows at the starting point
  double row_scale_min = 1e-8;
  double row_scale_max = 1e8;
  double s_max = 100.0;
  double delta_w_min = 1e-8;
  double delta_w_max = 1e40;
  double armijo = 1e-4;
  std::size_t max_backtracks = 40;
  std::size_t watchdog_trials = 3;
  bool verbose = false;
};

struct IterationStats {
  std::size_t I = 0;          // Newton iterations
  double T = 0.0;             // total wall time, s
  double Phi = 0.0;           // mean derivative time per iteration, ms
  double derivative_time = 0.0;  // total derivative time, s
  bool converged = false;
  std::string status;
  std::vector<double> mu_history;
};

struct SolveResult {
  std::vector<double> x;
  std::vector<double> lambda;  // constraint multipliers, L = f + lambda^T g
  std::vector<double> z_lower, z_upper;
  double objective = 0.0;
  double kkt_error = 0.0;        // scaled, as used for termination
  double constraint_violation = 0.0;  // unscaled, including bounds
  IterationStats stats;
};

// x0 defaults to nlp.initial_guess() when empty.
SolveResult solve(const NlpInterface& nlp, const SolverOptions& opts, std::span<const double> x0 = {});

// Max violation of g_L <= g(x) <= g_U and x_L <= x <= x_U.
double constraint_violation(const NlpInterface& nlp, std::span<const double> x);

}  // namespace radau
