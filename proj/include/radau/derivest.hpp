#pragma once

// Derivative estimation engines: central finite differences, bicomplex step
// and hyper-dual step, plus sparse Jacobian / weighted-Hessian drivers and the
// step-size error sweep.

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "radau/functions.hpp"
#include "radau/sparsity.hpp"

namespace radau {

enum class Method { CentralFD, Bicomplex, HyperDual };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct StepRule {
  Method method = Method::HyperDual;
  double h_first = 1.0;   // step for first derivatives
  double h_second = 1.0;  // step for second derivatives

  static StepRule defaults(Method m);
};

// Raised when a user callback fails under a seeded evaluation.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double fd_step(double x0, double h_base) { return h_base * (1.0 + std::abs(x0)); }

template <class F>
double fd_first(F&& f, double x0, double h) {
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

template <class F>
double fd_second(F&& f, double x0, double h) {
  return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h);
}

template <class G>
double fd_mixed(G&& g, double x0, double y0, double hx, double hy) {
  return (g(x0 + hx, y0 + hy) - g(x0 + hx, y0 - hy) - g(x0 - hx, y0 + hy) + g(x0 - hx, y0 - hy)) / (4.0 * hx * hy);
}

// Per-output derivative channels from a single seeded evaluation.
struct SeedDerivatives {
  std::vector<double> value;
  std::vector<double> d_i;
  std::vector<double> d_j;
  std::vector<double> d_ij;
};

// x_i += h*i1, x_j += h*i2 (same component when i == j).
SeedDerivatives bc_derivs(const VectorFunction& f, std::size_t i, std::size_t j, std::span<const double> x, double h);
// x_i += h*eps1, x_j += h*eps2.
SeedDerivatives hd_derivs(const VectorFunction& f, std::size_t i, std::size_t j, std::span<const double> x, double h);

struct JacobianValues {
  std::vector<double> values;  // aligned with pattern.entries()
  std::size_t evaluations = 0;
};

struct HessianValues {
  std::vector<double> values;  // aligned with pattern.entries()
  std::size_t evaluations = 0;
};

JacobianValues jacobian(const VectorFunction& f, std::span<const double> x, const JacobianPattern& pattern,
                        const StepRule& rule);

// Lower triangle of sum_k weights[k] * Hess(f_k), restricted to the pattern.
HessianValues hessian_weighted(const VectorFunction& f, std::span<const double> weights, std::span<const double> x,
                               const HessianPattern& pattern, const StepRule& rule);

inline double rel_error(double d, double d_hat) { return std::abs(d - d_hat) / (1.0 + std::abs(d)); }

struct SweepRow {
  double h = 0.0;
  Method method = Method::CentralFD;
  int order = 1;
  double rel_error = 0.0;
  bool ok = true;
};

// Error of first and second derivative estimates at x0 for every h and every
// method.  FD uses the raw h (no fd_step scaling) so rows are comparable.
std::vector<SweepRow> error_sweep(const VectorFunction& f, const std::function<double(double)>& analytic_first,
                                  const std::function<double(double)>& analytic_second, double x0,
                                  std::span<const double> h_grid);

// n log-spaced values from 10^hi_exp down to 10^lo_exp.
std::vector<double> log_grid(double hi_exp, double lo_exp, std::size_t n);

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

}  // namespace radau
