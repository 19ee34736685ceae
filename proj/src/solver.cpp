#include "radau/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace radau {

FunctionNlp::FunctionNlp(VectorFunction objective, VectorFunction constraints, std::vector<double> x_lower,
                         std::vector<double> x_upper, std::vector<double> g_lower, std::vector<double> g_upper,
                         std::vector<double> x0)
    : f_(std::move(objective)),
      g_(std::move(constraints)),
      x_lower_(std::move(x_lower)),
      x_upper_(std::move(x_upper)),
      g_lower_(std::move(g_lower)),
      g_upper_(std::move(g_upper)),
      x0_(std::move(x0)) {
  const std::size_t n = x_lower_.size();
  const std::size_t m = g_lower_.size();
  if (x_upper_.size() != n || x0_.size() != n || g_upper_.size() != m) {
    throw std::invalid_argument("FunctionNlp: inconsistent dimensions");
  }
  if (f_.n_in() != n || f_.n_out() != 1) throw std::invalid_argument("FunctionNlp: objective must map n -> 1");
  if (m > 0 && (g_.n_in() != n || g_.n_out() != m)) throw std::invalid_argument("FunctionNlp: constraints must map n -> m");
  VectorFunction f = f_;
  VectorFunction g = g_;
  lag_ = VectorFunction(n, 1 + m, [f, g, m](auto x, auto y) {
    f(x, y.subspan(0, 1));
    if (m > 0) g(x, y.subspan(1, m));
  });
  std::vector<Entry> grad;
  std::vector<Entry> jac;
  std::vector<Entry> hess;
  for (std::size_t c = 0; c < n; ++c) grad.push_back({0, c});
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) jac.push_back({r, c});
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c <= r; ++c) hess.push_back({r, c});
  }
  f_grad_ = JacobianPattern(1, n, std::move(grad));
  jac_ = JacobianPattern(m, n, std::move(jac));
  hess_ = HessianPattern(n, std::move(hess));
}

double FunctionNlp::objective(std::span<const double> x) const {
  double y = 0.0;
  f_(x, std::span<double>(&y, 1));
  return y;
}

void FunctionNlp::constraints(std::span<const double> x, std::span<double> g) const {
  if (m() > 0) g_(x, g);
}

void FunctionNlp::gradient(std::span<const double> x, std::span<double> grad) const {
  const auto v = radau::jacobian(f_, x, f_grad_, StepRule::defaults(Method::HyperDual));
  std::copy(v.values.begin(), v.values.end(), grad.begin());
}

void FunctionNlp::jacobian(std::span<const double> x, std::span<double> values) const {
  if (m() == 0) return;
  const auto v = radau::jacobian(g_, x, jac_, StepRule::defaults(Method::HyperDual));
  std::copy(v.values.begin(), v.values.end(), values.begin());
}

void FunctionNlp::hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                          std::span<double> values) const {
  std::vector<double> w(1 + m());
  w[0] = sigma;
  std::copy(lambda.begin(), lambda.end(), w.begin() + 1);
  const auto v = hessian_weighted(lag_, w, x, hess_, StepRule::defaults(Method::HyperDual));
  std::copy(v.values.begin(), v.values.end(), values.begin());
}

double constraint_violation(const NlpInterface& nlp, std::span<const double> x) {
  std::vector<double> g(nlp.m());
  nlp.constraints(x, g);
  double v = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    v = std::max(v, nlp.g_lower()[j] - g[j]);
    v = std::max(v, g[j] - nlp.g_upper()[j]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    v = std::max(v, nlp.x_lower()[i] - x[i]);
    v = std::max(v, x[i] - nlp.x_upper()[i]);
  }
  return v;
}

namespace {

using Clock = std::chrono::steady_clock;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double inf_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double one_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// Scaled view of the NLP with fixed variables removed and slacks appended:
// w = [free x, slacks of inequality rows].
class Reformulation {
 public:
  Reformulation(const NlpInterface& nlp, std::vector<double> x_template)
      : nlp_(nlp), n_(nlp.n()), m_(nlp.m()), x_(std::move(x_template)) {
    const auto& xl = nlp.x_lower();
    const auto& xu = nlp.x_upper();
    d_ = nlp.variable_scales();
    if (d_.empty()) d_.assign(n_, 1.0);
    if (d_.size() != n_) throw std::invalid_argument("solve: variable scales have the wrong length");
    for (double v : d_) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("solve: variable scales must be positive");
    }
    free_pos_.assign(n_, -1);
    for (std::size_t i = 0; i < n_; ++i) {
      if (xl[i] > xu[i]) throw std::invalid_argument("solve: inconsistent bounds on variable " + std::to_string(i));
      if (xl[i] == xu[i]) {
        x_[i] = xl[i];
      } else {
        free_pos_[i] = static_cast<long>(free_.size());
        free_.push_back(i);
      }
    }
    slack_of_.assign(m_, -1);
    for (std::size_t j = 0; j < m_; ++j) {
      if (nlp.g_lower()[j] > nlp.g_upper()[j]) {
        throw std::invalid_argument("solve: inconsistent bounds on constraint " + std::to_string(j));
      }
      if (nlp.g_lower()[j] != nlp.g_upper()[j]) {
        slack_of_[j] = static_cast<long>(ineq_.size());
        ineq_.push_back(j);
      }
    }
    nf_ = free_.size();
    nw_ = nf_ + ineq_.size();
    sc_.assign(m_, 1.0);
  }

  [[nodiscard]] std::size_t nw() const { return nw_; }
  [[nodiscard]] std::size_t nf() const { return nf_; }
  [[nodiscard]] std::size_t m() const { return m_; }
  [[nodiscard]] const std::vector<std::size_t>& free() const { return free_; }
  [[nodiscard]] long free_pos(std::size_t i) const { return free_pos_[i]; }
  [[nodiscard]] long slack_of(std::size_t j) const { return slack_of_[j]; }
  [[nodiscard]] const std::vector<std::size_t>& ineq() const { return ineq_; }
  [[nodiscard]] double sf() const { return sf_; }
  [[nodiscard]] const std::vector<double>& sc() const { return sc_; }
  [[nodiscard]] const std::vector<double>& d() const { return d_; }

  void set_scaling(double sf, std::vector<double> sc) {
    sf_ = sf;
    sc_ = std::move(sc);
    wl_.assign(nw_, -kInf);
    wu_.assign(nw_, kInf);
    for (std::size_t k = 0; k < nf_; ++k) {
      wl_[k] = nlp_.x_lower()[free_[k]] / d_[free_[k]];
      wu_[k] = nlp_.x_upper()[free_[k]] / d_[free_[k]];
    }
    for (std::size_t s = 0; s < ineq_.size(); ++s) {
      const std::size_t j = ineq_[s];
      wl_[nf_ + s] = sc_[j] * nlp_.g_lower()[j];
      wu_[nf_ + s] = sc_[j] * nlp_.g_upper()[j];
    }
  }
  [[nodiscard]] const std::vector<double>& wl() const { return wl_; }
  [[nodiscard]] const std::vector<double>& wu() const { return wu_; }

  const std::vector<double>& full_x(const std::vector<double>& w) {
    for (std::size_t k = 0; k < nf_; ++k) x_[free_[k]] = d_[free_[k]] * w[k];
    return x_;
  }
  [[nodiscard]] std::vector<double> free_part(const std::vector<double>& x) const {
    std::vector<double> w(nw_, 0.0);
    for (std::size_t k = 0; k < nf_; ++k) w[k] = x[free_[k]] / d_[free_[k]];
    return w;
  }

  // Scaled objective and equality-form residual c(w).
  double objective(const std::vector<double>& w) { return sf_ * nlp_.objective(full_x(w)); }
  void residual(const std::vector<double>& w, std::vector<double>& g_raw, std::vector<double>& c) {
    g_raw.resize(m_);
    c.resize(m_);
    nlp_.constraints(full_x(w), g_raw);
    for (std::size_t j = 0; j < m_; ++j) {
      const double gs = sc_[j] * g_raw[j];
      c[j] = slack_of_[j] < 0 ? gs - sc_[j] * nlp_.g_lower()[j]
                              : gs - w[nf_ + static_cast<std::size_t>(slack_of_[j])];
    }
  }

 private:
  const NlpInterface& nlp_;
  std::size_t n_, m_, nf_ = 0, nw_ = 0;
  std::vector<double> x_;
  std::vector<std::size_t> free_;
  std::vector<long> free_pos_;
  std::vector<std::size_t> ineq_;
  std::vector<long> slack_of_;
  double sf_ = 1.0;
  std::vector<double> sc_;
  std::vector<double> d_;
  std::vector<double> wl_, wu_;
};

// Lower-triangular KKT matrix with a fixed sparsity structure.
class KktSystem {
 public:
  KktSystem(const Reformulation& R, const JacobianPattern& jp, const HessianPattern& hp) : nw_(R.nw()), m_(R.m()) {
    const auto dim = static_cast<int>(nw_ + m_);
    std::vector<Eigen::Triplet<double, int>> trip;
    for (std::size_t i = 0; i < nw_ + m_; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 0.0);
    for (const auto& e : hp.entries()) {
      const long r = R.free_pos(e.row);
      const long c = R.free_pos(e.col);
      if (r >= 0 && c >= 0) trip.emplace_back(static_cast<int>(r), static_cast<int>(c), 0.0);
    }
    for (const auto& e : jp.entries()) {
      const long c = R.free_pos(e.col);
      if (c >= 0) trip.emplace_back(static_cast<int>(nw_ + e.row), static_cast<int>(c), 0.0);
    }
    for (std::size_t s = 0; s < R.ineq().size(); ++s) {
      trip.emplace_back(static_cast<int>(nw_ + R.ineq()[s]), static_cast<int>(R.nf() + s), 0.0);
    }
    K_.resize(dim, dim);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();

    diag_.resize(nw_ + m_);
    for (std::size_t i = 0; i < nw_ + m_; ++i) diag_[i] = locate(static_cast<int>(i), static_cast<int>(i));
    hess_.assign(hp.nnz(), -1);
    for (std::size_t k = 0; k < hp.nnz(); ++k) {
      const auto& e = hp.entries()[k];
      const long r = R.free_pos(e.row);
      const long c = R.free_pos(e.col);
      if (r >= 0 && c >= 0) hess_[k] = locate(static_cast<int>(r), static_cast<int>(c));
    }
    jac_.assign(jp.nnz(), -1);
    for (std::size_t k = 0; k < jp.nnz(); ++k) {
      const auto& e = jp.entries()[k];
      const long c = R.free_pos(e.col);
      if (c >= 0) jac_[k] = locate(static_cast<int>(nw_ + e.row), static_cast<int>(c));
    }
    slack_.resize(R.ineq().size());
    for (std::size_t s = 0; s < R.ineq().size(); ++s) {
      slack_[s] = locate(static_cast<int>(nw_ + R.ineq()[s]), static_cast<int>(R.nf() + s));
    }
    ldlt_.analyzePattern(K_);
  }

  // Fill with W (scaled Hessian values), Sigma and the scaled Jacobian.
  void fill(const std::vector<double>& hess_vals, const std::vector<double>& sigma, const std::vector<double>& jac_vals,
            const std::vector<double>& sc, double delta_w, double delta_c, const JacobianPattern& jp) {
    double* v = K_.valuePtr();
    std::fill(v, v + K_.nonZeros(), 0.0);
    for (std::size_t k = 0; k < hess_.size(); ++k) {
      if (hess_[k] >= 0) v[hess_[k]] += hess_vals[k];
    }
    for (std::size_t i = 0; i < nw_; ++i) v[diag_[i]] += sigma[i] + delta_w;
    for (std::size_t j = 0; j < m_; ++j) v[diag_[nw_ + j]] = -delta_c;
    const auto& je = jp.entries();
    for (std::size_t k = 0; k < jac_.size(); ++k) {
      if (jac_[k] >= 0) v[jac_[k]] += sc[je[k].row] * jac_vals[k];
    }
    for (long p : slack_) v[p] = -1.0;
  }

  // Returns false on a failed factorisation; otherwise reports the inertia.
  // Pivots below delta_c / 2 in magnitude count as zero when delta_c > 0.
  bool factorize(std::size_t& pos, std::size_t& neg, std::size_t& zero, double delta_c = 0.0) {
    ldlt_.factorize(K_);
    if (ldlt_.info() != Eigen::Success) return false;
    const auto& D = ldlt_.vectorD();
    pos = neg = zero = 0;
    double dmax = 0.0;
    for (Eigen::Index i = 0; i < D.size(); ++i) dmax = std::max(dmax, std::abs(D[i]));
    double zero_tol = 1e-14 * std::max(1.0, dmax);
    if (delta_c > 0.0) zero_tol = std::min(zero_tol, 0.5 * delta_c);
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      if (!std::isfinite(D[i])) return false;
      if (std::abs(D[i]) <= zero_tol) {
        ++zero;
      } else if (D[i] > 0.0) {
        ++pos;
      } else {
        ++neg;
      }
    }
    return true;
  }

  // Refines against the matrix without the constraint regularisation, so the
  // step solves the unperturbed system whenever that is well posed.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double delta_c = 0.0) {
    Eigen::VectorXd x = ldlt_.solve(rhs);
    const auto m = static_cast<Eigen::Index>(m_);
    auto residual = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd r = rhs - K_.selfadjointView<Eigen::Lower>() * v;
      if (delta_c > 0.0) r.tail(m) -= delta_c * v.tail(m);
      return r;
    };
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd r = residual(x);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 10 && rn > 1e-15 * scale; ++it) {
      Eigen::VectorXd xn = x + ldlt_.solve(r);
      Eigen::VectorXd rr = residual(xn);
      const double rnn = rr.lpNorm<Eigen::Infinity>();
      if (!(rnn < 0.9 * rn)) break;
      x.swap(xn);
      r.swap(rr);
      rn = rnn;
    }
    return x;
  }

 private:
  long locate(int r, int c) const {
    const int* outer = K_.outerIndexPtr();
    const int* inner = K_.innerIndexPtr();
    const int* first = inner + outer[c];
    const int* last = inner + outer[c + 1];
    const int* it = std::lower_bound(first, last, r);
    if (it == last || *it != r) throw std::logic_error("KKT structure is missing an entry");
    return static_cast<long>(it - inner);
  }

  std::size_t nw_, m_;
  SpMat K_;
  std::vector<long> diag_, hess_, jac_, slack_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

struct BoundSet {
  std::vector<std::size_t> lower, upper;  // indices with finite bounds
};

}  // namespace

SolveResult solve(const NlpInterface& nlp, const SolverOptions& opts, std::span<const double> x0_in) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("solve: max_iter must be at least 1");
  const auto t_start = Clock::now();
  const std::size_t n = nlp.n();
  const std::size_t m = nlp.m();

  std::vector<double> x0 = x0_in.empty() ? nlp.initial_guess() : std::vector<double>(x0_in.begin(), x0_in.end());
  if (x0.size() != n) throw std::invalid_argument("solve: initial guess has the wrong length");

  Reformulation R(nlp, x0);
  const std::size_t nf = R.nf();
  const std::size_t nw = R.nw();
  const auto& jp = nlp.jacobian_pattern();
  const auto& hp = nlp.hessian_pattern();

  IterationStats stats;
  auto timed = [&stats](auto&& fn) {
    const auto t = Clock::now();
    fn();
    stats.derivative_time += seconds_since(t);
  };

  // Push free variables into the interior.
  auto push = [&](double v, double lo, double hi) {
    if (std::isfinite(lo)) {
      double p = opts.bound_push * std::max(1.0, std::abs(lo));
      if (std::isfinite(hi)) p = std::min(p, opts.bound_frac * (hi - lo));
      v = std::max(v, lo + p);
    }
    if (std::isfinite(hi)) {
      double p = opts.bound_push * std::max(1.0, std::abs(hi));
      if (std::isfinite(lo)) p = std::min(p, opts.bound_frac * (hi - lo));
      v = std::min(v, hi - p);
    }
    return v;
  };
  R.set_scaling(1.0, std::vector<double>(m, 1.0));
  std::vector<double> w = R.free_part(x0);
  for (std::size_t k = 0; k < nf; ++k) w[k] = push(w[k], R.wl()[k], R.wu()[k]);
  const std::vector<double>& xfull0 = R.full_x(w);

  const std::vector<double>& dsc = R.d();
  std::vector<double> jac_d(jp.nnz());
  for (std::size_t k = 0; k < jp.nnz(); ++k) jac_d[k] = dsc[jp.entries()[k].col];
  std::vector<double> hess_d(hp.nnz());
  for (std::size_t k = 0; k < hp.nnz(); ++k) hess_d[k] = dsc[hp.entries()[k].row] * dsc[hp.entries()[k].col];

  // Scaling at the starting point: rows are equilibrated (optionally), then
  // gradients above the threshold are scaled down.
  std::vector<double> grad(n);
  std::vector<double> jac(jp.nnz());
  timed([&] {
    nlp.gradient(xfull0, grad);
    nlp.jacobian(xfull0, jac);
  });
  for (std::size_t k = 0; k < jp.nnz(); ++k) jac[k] *= jac_d[k];
  double sf = 1.0;
  {
    double gmax = 0.0;
    for (std::size_t k = 0; k < nf; ++k) gmax = std::max(gmax, std::abs(dsc[R.free()[k]] * grad[R.free()[k]]));
    if (gmax > opts.scaling_threshold) sf = opts.scaling_threshold / gmax;
  }
  std::vector<double> sc(m, 1.0);
  {
    std::vector<double> rmax(m, 0.0);
    for (std::size_t k = 0; k < jp.nnz(); ++k) {
      const auto& e = jp.entries()[k];
      if (R.free_pos(e.col) >= 0) rmax[e.row] = std::max(rmax[e.row], std::abs(jac[k]));
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (opts.equilibrate_rows && rmax[j] > 0.0) {
        sc[j] = std::clamp(1.0 / rmax[j], opts.row_scale_min, opts.row_scale_max);
      } else if (rmax[j] > opts.scaling_threshold) {
        sc[j] = opts.scaling_threshold / rmax[j];
      }
    }
  }
  R.set_scaling(sf, sc);
  const auto& wl = R.wl();
  const auto& wu = R.wu();

  std::vector<double> g_raw;
  std::vector<double> c;
  R.residual(w, g_raw, c);
  for (std::size_t s = 0; s < R.ineq().size(); ++s) {
    const std::size_t j = R.ineq()[s];
    w[nf + s] = push(sc[j] * g_raw[j], wl[nf + s], wu[nf + s]);
  }

  BoundSet B;
  for (std::size_t i = 0; i < nw; ++i) {
    if (std::isfinite(wl[i])) B.lower.push_back(i);
    if (std::isfinite(wu[i])) B.upper.push_back(i);
  }
  std::vector<double> zl(nw, 0.0);
  std::vector<double> zu(nw, 0.0);
  for (auto i : B.lower) zl[i] = 1.0;
  for (auto i : B.upper) zu[i] = 1.0;
  std::vector<double> lam(m, 0.0);

  KktSystem K(R, jp, hp);
  std::vector<double> hess(hp.nnz(), 0.0);

  double mu = opts.mu_init;
  double tau = std::max(opts.tau_min, 1.0 - mu);
  const double mu_min = opts.tol / 10.0;
  double nu = 1.0;
  double delta_w_last = 0.0;
  bool needs_delta_c = false;
  double log_delta_w = 0.0;
  double log_alpha = 0.0;
  const double kappa_d = 1e-5;
  const double kappa_sigma = 1e10;
  stats.mu_history.push_back(mu);

  std::vector<double> grad_w(nw, 0.0);
  std::vector<double> jtl(nw, 0.0);

  auto eval_first = [&](const std::vector<double>& wv) {
    const auto& x = R.full_x(wv);
    timed([&] {
      nlp.gradient(x, grad);
      nlp.jacobian(x, jac);
    });
    for (std::size_t k = 0; k < jac.size(); ++k) jac[k] *= jac_d[k];
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    for (std::size_t k = 0; k < nf; ++k) grad_w[k] = sf * dsc[R.free()[k]] * grad[R.free()[k]];
  };
  // J_w^T v over the scaled, reduced Jacobian.
  auto jt_times = [&](const std::vector<double>& v, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < jp.nnz(); ++k) {
      const auto& e = jp.entries()[k];
      const long col = R.free_pos(e.col);
      if (col >= 0) out[static_cast<std::size_t>(col)] += sc[e.row] * jac[k] * v[e.row];
    }
    for (std::size_t s = 0; s < R.ineq().size(); ++s) out[nf + s] -= v[R.ineq()[s]];
  };

  auto errors = [&](double mu_target, double& dual, double& primal, double& compl_err) {
    jt_times(lam, jtl);
    dual = 0.0;
    for (std::size_t i = 0; i < nw; ++i) dual = std::max(dual, std::abs(grad_w[i] + jtl[i] - zl[i] + zu[i]));
    primal = inf_norm(c);
    compl_err = 0.0;
    for (auto i : B.lower) compl_err = std::max(compl_err, std::abs((w[i] - wl[i]) * zl[i] - mu_target));
    for (auto i : B.upper) compl_err = std::max(compl_err, std::abs((wu[i] - w[i]) * zu[i] - mu_target));
  };
  auto scaled_error = [&](double mu_target) {
    double dual = 0.0;
    double primal = 0.0;
    double compl_err = 0.0;
    errors(mu_target, dual, primal, compl_err);
    const double nz = static_cast<double>(B.lower.size() + B.upper.size());
    const double zsum = one_norm(zl) + one_norm(zu);
    const double s_d = std::max(opts.s_max, (one_norm(lam) + zsum) / std::max(1.0, static_cast<double>(m) + nz)) / opts.s_max;
    const double s_c = std::max(opts.s_max, zsum / std::max(1.0, nz)) / opts.s_max;
    return std::max({dual / s_d, primal, compl_err / s_c});
  };

  auto barrier = [&](const std::vector<double>& wv, double f) {
    double phi = f;
    for (auto i : B.lower) {
      phi -= mu * std::log(wv[i] - wl[i]);
      if (!std::isfinite(wu[i])) phi += kappa_d * mu * (wv[i] - wl[i]);
    }
    for (auto i : B.upper) {
      phi -= mu * std::log(wu[i] - wv[i]);
      if (!std::isfinite(wl[i])) phi += kappa_d * mu * (wu[i] - wv[i]);
    }
    return phi;
  };
  auto barrier_grad = [&](std::vector<double>& out) {
    out = grad_w;
    for (auto i : B.lower) {
      out[i] -= mu / (w[i] - wl[i]);
      if (!std::isfinite(wu[i])) out[i] += kappa_d * mu;
    }
    for (auto i : B.upper) {
      out[i] += mu / (wu[i] - w[i]);
      if (!std::isfinite(wl[i])) out[i] -= kappa_d * mu;
    }
  };

  // Least-squares multiplier estimate.
  eval_first(w);
  {
    std::vector<double> zero_sigma(nw, 0.0);
    std::vector<double> zero_h(hp.nnz(), 0.0);
    K.fill(zero_h, zero_sigma, jac, sc, 1.0, 0.0, jp);
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t zer = 0;
    bool ok = K.factorize(pos, neg, zer) && zer == 0;
    if (!ok) {
      K.fill(zero_h, zero_sigma, jac, sc, 1.0, 1e-8, jp);
      ok = K.factorize(pos, neg, zer, 1e-8) && zer == 0;
    }
    if (ok && m > 0) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nw + m));
      for (std::size_t i = 0; i < nw; ++i) rhs[static_cast<Eigen::Index>(i)] = -(grad_w[i] - zl[i] + zu[i]);
      const Eigen::VectorXd sol = K.solve(rhs);
      double lmax = 0.0;
      for (std::size_t j = 0; j < m; ++j) lmax = std::max(lmax, std::abs(sol[static_cast<Eigen::Index>(nw + j)]));
      if (std::isfinite(lmax) && lmax <= 1e3) {
        for (std::size_t j = 0; j < m; ++j) lam[j] = sol[static_cast<Eigen::Index>(nw + j)];
      }
    }
  }

  double f = R.objective(w);
  R.residual(w, g_raw, c);
  std::vector<double> sigma(nw, 0.0);
  std::vector<double> gphi(nw, 0.0);
  std::vector<double> dw(nw), dl(m), dzl(nw), dzu(nw);
  std::vector<double> w_trial(nw);
  std::vector<double> g_trial;
  std::vector<double> c_trial;
  std::size_t shortened_in_row = 0;

  SolveResult result;
  for (std::size_t iter = 0;; ++iter) {
    const double e0 = scaled_error(0.0);
    const double viol = constraint_violation(nlp, R.full_x(w));
    result.kkt_error = e0;
    if (opts.verbose) {
      std::fprintf(stderr, "iter %4zu  f % .10e  E %.3e  viol %.3e  mu %.2e  nu %.2e  dw %.1e  alpha %.2e\n", iter,
                   f / sf, e0, viol, mu, nu, log_delta_w, log_alpha);
    }
    if (e0 <= opts.tol && viol <= opts.constr_viol_tol) {
      stats.converged = true;
      stats.status = "converged";
      break;
    }
    if (!std::isfinite(e0)) {
      stats.status = "non-finite iterate";
      break;
    }
    if (iter >= opts.max_iter) {
      stats.status = "iteration limit";
      break;
    }

    // Monotone barrier update.
    while (mu > mu_min && scaled_error(mu) <= opts.barrier_tol_factor * mu) {
      mu = std::max(mu_min, std::min(opts.mu_linear_decrease * mu, std::pow(mu, opts.mu_superlinear_power)));
      tau = std::max(opts.tau_min, 1.0 - mu);
      nu = 1.0;
      stats.mu_history.push_back(mu);
    }

    {
      std::vector<double> lam_s(m);
      for (std::size_t j = 0; j < m; ++j) lam_s[j] = sc[j] * lam[j];
      const auto& x = R.full_x(w);
      timed([&] { nlp.hessian(x, sf, lam_s, hess); });
      for (std::size_t k = 0; k < hess.size(); ++k) hess[k] *= hess_d[k];
    }

    std::fill(sigma.begin(), sigma.end(), 0.0);
    for (auto i : B.lower) sigma[i] += zl[i] / (w[i] - wl[i]);
    for (auto i : B.upper) sigma[i] += zu[i] / (wu[i] - w[i]);

    // Inertia-corrected factorisation.
    double delta_w = 0.0;
    double delta_c = needs_delta_c ? 1e-8 * std::pow(mu, 0.25) : 0.0;
    bool first_try = true;
    for (;;) {
      K.fill(hess, sigma, jac, sc, delta_w, delta_c, jp);
      std::size_t pos = 0;
      std::size_t neg = 0;
      std::size_t zer = 0;
      const bool ok = K.factorize(pos, neg, zer, delta_c);
      if (ok && zer == 0 && pos == nw && neg == m) break;
      if ((!ok || zer > 0) && delta_c == 0.0 && m > 0) {
        delta_c = 1e-8 * std::pow(mu, 0.25);
        needs_delta_c = true;
        continue;
      }
      if (first_try) {
        delta_w = delta_w_last == 0.0 ? opts.delta_w_min : std::max(1e-20, delta_w_last / 3.0);
        first_try = false;
      } else {
        delta_w *= delta_w_last == 0.0 ? 100.0 : 8.0;
      }
      if (delta_w > opts.delta_w_max) {
        throw std::runtime_error("solve: KKT factorization failed after the regularization cap");
      }
    }
    if (delta_w > 0.0) delta_w_last = delta_w;
    log_delta_w = delta_w;

    barrier_grad(gphi);
    jt_times(lam, jtl);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nw + m));
    for (std::size_t i = 0; i < nw; ++i) rhs[static_cast<Eigen::Index>(i)] = -(gphi[i] + jtl[i]);
    for (std::size_t j = 0; j < m; ++j) rhs[static_cast<Eigen::Index>(nw + j)] = -c[j];
    const Eigen::VectorXd sol = K.solve(rhs, delta_c);
    for (std::size_t i = 0; i < nw; ++i) dw[i] = sol[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < m; ++j) dl[j] = sol[static_cast<Eigen::Index>(nw + j)];
    std::fill(dzl.begin(), dzl.end(), 0.0);
    std::fill(dzu.begin(), dzu.end(), 0.0);
    for (auto i : B.lower) dzl[i] = mu / (w[i] - wl[i]) - zl[i] - zl[i] / (w[i] - wl[i]) * dw[i];
    for (auto i : B.upper) dzu[i] = mu / (wu[i] - w[i]) - zu[i] + zu[i] / (wu[i] - w[i]) * dw[i];

    // Fraction to the boundary.
    double alpha_max = 1.0;
    double alpha_z = 1.0;
    for (auto i : B.lower) {
      if (dw[i] < 0.0) alpha_max = std::min(alpha_max, -tau * (w[i] - wl[i]) / dw[i]);
      if (dzl[i] < 0.0) alpha_z = std::min(alpha_z, -tau * zl[i] / dzl[i]);
    }
    for (auto i : B.upper) {
      if (dw[i] > 0.0) alpha_max = std::min(alpha_max, tau * (wu[i] - w[i]) / dw[i]);
      if (dzu[i] < 0.0) alpha_z = std::min(alpha_z, -tau * zu[i] / dzu[i]);
    }

    // Penalty parameter for the l1 merit function.
    const double c1 = one_norm(c);
    double dphi = 0.0;
    for (std::size_t i = 0; i < nw; ++i) dphi += gphi[i] * dw[i];
    double curv = 0.0;
    {
      std::vector<double> hd(nw, 0.0);
      for (std::size_t k = 0; k < hp.nnz(); ++k) {
        const auto& e = hp.entries()[k];
        const long r = R.free_pos(e.row);
        const long cc = R.free_pos(e.col);
        if (r < 0 || cc < 0) continue;
        hd[static_cast<std::size_t>(r)] += hess[k] * dw[static_cast<std::size_t>(cc)];
        if (r != cc) hd[static_cast<std::size_t>(cc)] += hess[k] * dw[static_cast<std::size_t>(r)];
      }
      for (std::size_t i = 0; i < nw; ++i) curv += dw[i] * (hd[i] + sigma[i] * dw[i]);
    }
    if (c1 > 0.0) {
      const double nu_req = (dphi + 0.5 * std::max(0.0, curv)) / (0.9 * c1);
      if (nu < nu_req) nu = nu_req + 1.0;
    }
    const double merit0 = barrier(w, f) + nu * c1;
    const double dmerit = dphi - nu * c1;

    // Backtracking; after repeated shortened steps a full step is tried once
    // without the merit test (watchdog).
    double alpha = alpha_max;
    bool accepted = false;
    double f_trial = f;
    const bool watchdog = shortened_in_row >= opts.watchdog_trials;
    for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < nw; ++i) w_trial[i] = w[i] + alpha * dw[i];
      bool finite = true;
      try {
        f_trial = R.objective(w_trial);
        R.residual(w_trial, g_trial, c_trial);
      } catch (const std::exception&) {
        finite = false;
      }
      if (finite) {
        finite = std::isfinite(f_trial);
        for (double v : c_trial) finite = finite && std::isfinite(v);
      }
      if (finite) {
        if (watchdog) {
          accepted = true;
          break;
        }
        const double merit = barrier(w_trial, f_trial) + nu * one_norm(c_trial);
        if (merit <= merit0 + opts.armijo * alpha * dmerit) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Take the shortest trial if it is at least finite.
      bool finite = std::isfinite(f_trial);
      for (double v : c_trial) finite = finite && std::isfinite(v);
      if (!finite) {
        stats.status = "line search failed";
        break;
      }
    }
    log_alpha = alpha;
    shortened_in_row = (alpha < alpha_max && !watchdog) ? shortened_in_row + 1 : 0;

    w.swap(w_trial);
    f = f_trial;
    c.swap(c_trial);
    g_raw.swap(g_trial);
    for (std::size_t j = 0; j < m; ++j) lam[j] += alpha * dl[j];
    for (auto i : B.lower) {
      zl[i] += alpha_z * dzl[i];
      const double d = w[i] - wl[i];
      zl[i] = std::max(std::min(zl[i], kappa_sigma * mu / d), mu / (kappa_sigma * d));
    }
    for (auto i : B.upper) {
      zu[i] += alpha_z * dzu[i];
      const double d = wu[i] - w[i];
      zu[i] = std::max(std::min(zu[i], kappa_sigma * mu / d), mu / (kappa_sigma * d));
    }
    ++stats.I;
    eval_first(w);
  }

  const auto& x = R.full_x(w);
  result.x = x;
  result.objective = nlp.objective(x);
  result.constraint_violation = constraint_violation(nlp, x);
  result.lambda.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) result.lambda[j] = sc[j] * lam[j] / sf;
  result.z_lower.assign(n, 0.0);
  result.z_upper.assign(n, 0.0);
  for (std::size_t k = 0; k < nf; ++k) {
    result.z_lower[R.free()[k]] = zl[k] / (sf * dsc[R.free()[k]]);
    result.z_upper[R.free()[k]] = zu[k] / (sf * dsc[R.free()[k]]);
  }
  stats.T = seconds_since(t_start);
  stats.Phi = stats.I > 0 ? 1000.0 * stats.derivative_time / static_cast<double>(stats.I) : 0.0;
  result.stats = std::move(stats);
  return result;
}

}  // namespace radau
