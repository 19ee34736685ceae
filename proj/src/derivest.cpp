#include "radau/derivest.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace radau {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::CentralFD:
      return "CentralFD";
    case Method::Bicomplex:
      return "Bicomplex";
    case Method::HyperDual:
      return "HyperDual";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "CentralFD" || name == "fd") return Method::CentralFD;
  if (name == "Bicomplex" || name == "bc") return Method::Bicomplex;
  if (name == "HyperDual" || name == "hd") return Method::HyperDual;
  throw std::invalid_argument("unknown derivative method '" + std::string(name) + "'");
}

StepRule StepRule::defaults(Method m) {
  const double eps = std::numeric_limits<double>::epsilon();
  switch (m) {
    case Method::CentralFD:
      return {m, std::cbrt(eps), std::sqrt(std::sqrt(eps))};
    case Method::Bicomplex:
      return {m, 1e-8, 1e-4};
    case Method::HyperDual:
      return {m, 1.0, 1.0};
  }
  return {};
}

namespace {

std::string seed_context(std::size_t i, std::size_t j) {
  return "seed (" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

inline void seed(Bicomplex& z, int channel, double h) { (channel == 1 ? z.im1 : z.im2) += h; }
inline void seed(HyperDual& w, int channel, double h) { (channel == 1 ? w.ep1 : w.ep2) += h; }
inline double ch1(const Bicomplex& z) { return z.im1; }
inline double ch2(const Bicomplex& z) { return z.im2; }
inline double ch12(const Bicomplex& z) { return z.im12; }
inline double ch1(const HyperDual& w) { return w.ep1; }
inline double ch2(const HyperDual& w) { return w.ep2; }
inline double ch12(const HyperDual& w) { return w.ep12; }

// Evaluates f with channel 1 on x_i and, when use_j, channel 2 on x_j.
template <Hypercomplex T>
void seeded_eval(const VectorFunction& f, std::span<const double> x, std::size_t i, std::size_t j, bool use_j,
                 double h, std::vector<T>& xin, std::vector<T>& yout) {
  xin.resize(x.size());
  yout.resize(f.n_out());
  for (std::size_t k = 0; k < x.size(); ++k) xin[k] = T(x[k]);
  seed(xin[i], 1, h);
  if (use_j) seed(xin[j], 2, h);
  try {
    f(std::span<const T>(xin), std::span<T>(yout));
  } catch (const std::exception& ex) {
    throw EvaluationError(std::string(ex.what()) + " [" + seed_context(i, use_j ? j : i) + "]");
  }
}

template <Hypercomplex T>
SeedDerivatives seeded_derivs(const VectorFunction& f, std::size_t i, std::size_t j, std::span<const double> x,
                              double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  if (i >= x.size() || j >= x.size()) throw std::out_of_range("seed index out of range");
  std::vector<T> xin;
  std::vector<T> yout;
  seeded_eval(f, x, i, j, true, h, xin, yout);
  SeedDerivatives d;
  const std::size_t m = yout.size();
  d.value.resize(m);
  d.d_i.resize(m);
  d.d_j.resize(m);
  d.d_ij.resize(m);
  for (std::size_t r = 0; r < m; ++r) {
    d.value[r] = real_part(yout[r]);
    d.d_i[r] = ch1(yout[r]) / h;
    d.d_j[r] = ch2(yout[r]) / h;
    d.d_ij[r] = ch12(yout[r]) / (h * h);
  }
  return d;
}

JacobianValues jacobian_fd(const VectorFunction& f, std::span<const double> x, const JacobianPattern& pattern,
                           double h_base) {
  JacobianValues out;
  out.values.assign(pattern.nnz(), 0.0);
  std::vector<std::vector<std::size_t>> by_col(pattern.cols());
  const auto& entries = pattern.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) by_col[entries[k].col].push_back(k);

  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> yp(f.n_out());
  std::vector<double> ym(f.n_out());
  for (std::size_t c = 0; c < by_col.size(); ++c) {
    if (by_col[c].empty()) continue;
    const double h = fd_step(x[c], h_base);
    try {
      xp[c] = x[c] + h;
      f(std::span<const double>(xp), std::span<double>(yp));
      xp[c] = x[c] - h;
      f(std::span<const double>(xp), std::span<double>(ym));
    } catch (const std::exception& ex) {
      throw EvaluationError(std::string(ex.what()) + " [finite difference on column " + std::to_string(c) + "]");
    }
    xp[c] = x[c];
    out.evaluations += 2;
    for (std::size_t k : by_col[c]) {
      const std::size_t r = entries[k].row;
      out.values[k] = (yp[r] - ym[r]) / (2.0 * h);
    }
  }
  return out;
}

template <Hypercomplex T>
JacobianValues jacobian_step(const VectorFunction& f, std::span<const double> x, const JacobianPattern& pattern,
                             double h) {
  JacobianValues out;
  out.values.assign(pattern.nnz(), 0.0);
  std::vector<std::vector<std::size_t>> by_col(pattern.cols());
  const auto& entries = pattern.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) by_col[entries[k].col].push_back(k);

  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < by_col.size(); ++c) {
    if (!by_col[c].empty()) cols.push_back(c);
  }

  std::vector<T> xin;
  std::vector<T> yout;
  for (std::size_t p = 0; p < cols.size(); p += 2) {
    const std::size_t a = cols[p];
    const bool paired = p + 1 < cols.size();
    const std::size_t b = paired ? cols[p + 1] : a;
    seeded_eval(f, x, a, b, paired, h, xin, yout);
    ++out.evaluations;
    for (std::size_t k : by_col[a]) out.values[k] = ch1(yout[entries[k].row]) / h;
    if (paired) {
      for (std::size_t k : by_col[b]) out.values[k] = ch2(yout[entries[k].row]) / h;
    }
  }
  return out;
}

double weighted_sum(std::span<const double> w, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] != 0.0) s += w[k] * y[k];
  }
  return s;
}

HessianValues hessian_fd(const VectorFunction& f, std::span<const double> weights, std::span<const double> x,
                         const HessianPattern& pattern, double h_base) {
  HessianValues out;
  out.values.assign(pattern.nnz(), 0.0);
  if (pattern.empty()) return out;

  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> y(f.n_out());
  auto lagrangian = [&]() {
    try {
      f(std::span<const double>(xp), std::span<double>(y));
    } catch (const std::exception& ex) {
      throw EvaluationError(std::string(ex.what()) + " [finite-difference Hessian]");
    }
    ++out.evaluations;
    return weighted_sum(weights, y);
  };

  const double l0 = lagrangian();
  const auto& entries = pattern.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const std::size_t i = entries[k].row;
    const std::size_t j = entries[k].col;
    const double hi = fd_step(x[i], h_base);
    if (i == j) {
      xp[i] = x[i] + hi;
      const double lp = lagrangian();
      xp[i] = x[i] - hi;
      const double lm = lagrangian();
      xp[i] = x[i];
      out.values[k] = (lp - 2.0 * l0 + lm) / (hi * hi);
    } else {
      const double hj = fd_step(x[j], h_base);
      double corner[2][2];
      for (int si = 0; si < 2; ++si) {
        for (int sj = 0; sj < 2; ++sj) {
          xp[i] = x[i] + (si == 0 ? hi : -hi);
          xp[j] = x[j] + (sj == 0 ? hj : -hj);
          corner[si][sj] = lagrangian();
        }
      }
      xp[i] = x[i];
      xp[j] = x[j];
      out.values[k] = (corner[0][0] - corner[0][1] - corner[1][0] + corner[1][1]) / (4.0 * hi * hj);
    }
  }
  return out;
}

template <Hypercomplex T>
HessianValues hessian_step(const VectorFunction& f, std::span<const double> weights, std::span<const double> x,
                           const HessianPattern& pattern, double h) {
  HessianValues out;
  out.values.assign(pattern.nnz(), 0.0);
  std::vector<T> xin;
  std::vector<T> yout;
  const auto& entries = pattern.entries();
  const double h2 = h * h;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    seeded_eval(f, x, entries[k].row, entries[k].col, true, h, xin, yout);
    ++out.evaluations;
    double s = 0.0;
    for (std::size_t r = 0; r < yout.size(); ++r) {
      if (weights[r] != 0.0) s += weights[r] * ch12(yout[r]);
    }
    out.values[k] = s / h2;
  }
  return out;
}

}  // namespace

SeedDerivatives bc_derivs(const VectorFunction& f, std::size_t i, std::size_t j, std::span<const double> x, double h) {
  return seeded_derivs<Bicomplex>(f, i, j, x, h);
}

SeedDerivatives hd_derivs(const VectorFunction& f, std::size_t i, std::size_t j, std::span<const double> x, double h) {
  return seeded_derivs<HyperDual>(f, i, j, x, h);
}

JacobianValues jacobian(const VectorFunction& f, std::span<const double> x, const JacobianPattern& pattern,
                        const StepRule& rule) {
  if (x.size() != f.n_in()) throw std::invalid_argument("jacobian: point has the wrong dimension");
  if (pattern.rows() != f.n_out() || pattern.cols() != f.n_in()) {
    throw std::invalid_argument("jacobian: pattern does not match the function dimensions");
  }
  if (pattern.empty()) return {};
  switch (rule.method) {
    case Method::CentralFD:
      return jacobian_fd(f, x, pattern, rule.h_first);
    case Method::Bicomplex:
      return jacobian_step<Bicomplex>(f, x, pattern, rule.h_first);
    case Method::HyperDual:
      return jacobian_step<HyperDual>(f, x, pattern, rule.h_first);
  }
  return {};
}

HessianValues hessian_weighted(const VectorFunction& f, std::span<const double> weights, std::span<const double> x,
                               const HessianPattern& pattern, const StepRule& rule) {
  if (x.size() != f.n_in()) throw std::invalid_argument("hessian_weighted: point has the wrong dimension");
  if (weights.size() != f.n_out()) throw std::invalid_argument("hessian_weighted: one weight per output required");
  if (pattern.size() != f.n_in()) throw std::invalid_argument("hessian_weighted: pattern does not match the inputs");
  if (pattern.empty()) return {};
  switch (rule.method) {
    case Method::CentralFD:
      return hessian_fd(f, weights, x, pattern, rule.h_second);
    case Method::Bicomplex:
      return hessian_step<Bicomplex>(f, weights, x, pattern, rule.h_second);
    case Method::HyperDual:
      return hessian_step<HyperDual>(f, weights, x, pattern, rule.h_second);
  }
  return {};
}

std::vector<SweepRow> error_sweep(const VectorFunction& f, const std::function<double(double)>& analytic_first,
                                  const std::function<double(double)>& analytic_second, double x0,
                                  std::span<const double> h_grid) {
  if (f.n_in() != 1 || f.n_out() != 1) throw std::invalid_argument("error_sweep: scalar function required");
  const double d1 = analytic_first(x0);
  const double d2 = analytic_second(x0);
  auto scalar = [&](double x) {
    double y = 0.0;
    f(std::span<const double>(&x, 1), std::span<double>(&y, 1));
    return y;
  };
  const std::vector<double> xv{x0};

  std::vector<SweepRow> rows;
  rows.reserve(h_grid.size() * 6);
  auto record = [&](double h, Method m, int order, auto&& estimate) {
    SweepRow row{h, m, order, std::numeric_limits<double>::quiet_NaN(), false};
    try {
      const double est = estimate();
      row.rel_error = rel_error(order == 1 ? d1 : d2, est);
      row.ok = std::isfinite(row.rel_error);
    } catch (const std::exception&) {
      row.ok = false;
    }
    rows.push_back(row);
  };

  for (double h : h_grid) {
    record(h, Method::CentralFD, 1, [&] { return fd_first(scalar, x0, h); });
    record(h, Method::CentralFD, 2, [&] { return fd_second(scalar, x0, h); });
    record(h, Method::Bicomplex, 1, [&] { return bc_derivs(f, 0, 0, xv, h).d_i[0]; });
    record(h, Method::Bicomplex, 2, [&] { return bc_derivs(f, 0, 0, xv, h).d_ij[0]; });
    record(h, Method::HyperDual, 1, [&] { return hd_derivs(f, 0, 0, xv, h).d_i[0]; });
    record(h, Method::HyperDual, 2, [&] { return hd_derivs(f, 0, 0, xv, h).d_ij[0]; });
  }
  return rows;
}

std::vector<double> log_grid(double hi_exp, double lo_exp, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {std::pow(10.0, hi_exp)};
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double e = hi_exp + (lo_exp - hi_exp) * static_cast<double>(k) / static_cast<double>(n - 1);
    g[k] = std::pow(10.0, e);
  }
  return g;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "h,method,order,rel_error\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17e", r.h);
    os << buf << ',' << method_name(r.method) << ',' << r.order << ',';
    if (r.ok) {
      std::snprintf(buf, sizeof buf, "%.17e", r.rel_error);
      os << buf;
    } else {
      os << "nan";
    }
    os << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "h,method,order,rel_error") {
    throw std::runtime_error("sweep CSV: unexpected header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string h, m, o, e;
    if (!std::getline(ss, h, ',') || !std::getline(ss, m, ',') || !std::getline(ss, o, ',') ||
        !std::getline(ss, e)) {
      throw std::runtime_error("sweep CSV: malformed row '" + line + "'");
    }
    SweepRow r;
    r.h = std::stod(h);
    r.method = parse_method(m);
    r.order = std::stoi(o);
    if (e == "nan") {
      r.rel_error = std::numeric_limits<double>::quiet_NaN();
      r.ok = false;
    } else {
      r.rel_error = std::stod(e);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace radau
