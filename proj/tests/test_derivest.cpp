#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "radau/derivest.hpp"
#include "radau/problems.hpp"

using namespace radau;

namespace {

double relerr(double want, double got) { return std::abs(want - got) / std::abs(want); }

double eval1(const VectorFunction& f, double x) {
  double y = 0.0;
  f(std::span<const double>(&x, 1), std::span<double>(&y, 1));
  return y;
}

JacobianPattern dense_jacobian(std::size_t m, std::size_t n) {
  std::vector<Entry> e;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) e.push_back({r, c});
  }
  return {m, n, e};
}

HessianPattern dense_hessian(std::size_t n) {
  std::vector<Entry> e;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c <= r; ++c) e.push_back({r, c});
  }
  return {n, e};
}

}  // namespace

TEST(FdStep, Examples) {
  EXPECT_DOUBLE_EQ(fd_step(0.0, 1e-5), 1e-5);
  EXPECT_DOUBLE_EQ(fd_step(-3.0, 1e-5), 4e-5);
  EXPECT_DOUBLE_EQ(fd_step(9.0, 0.1), 1.0);
}

TEST(FdFirst, Examples) {
  EXPECT_DOUBLE_EQ(fd_first([](double x) { return x * x; }, 1.0, 0.1), 2.0);
  EXPECT_EQ(fd_first([](double x) { return std::abs(x); }, 0.0, 0.37), 0.0);
  const auto s = example_scalar();
  const double d = fd_first(s.f, 0.5, 1e-5);
  EXPECT_LE(relerr(s.f1(0.5), d), 1e-8);
  EXPECT_NEAR(d, 0.274211, 1e-6);
}

TEST(FdSecond, Examples) {
  EXPECT_NEAR(fd_second([](double x) { return x * x * x; }, 2.0, 0.01), 12.0, 1e-3);
  EXPECT_DOUBLE_EQ(fd_mixed([](double x, double y) { return x * y; }, 1.0, 1.0, 0.1, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(fd_mixed([](double x, double y) { return x * x + y * y; }, 3.0, 4.0, 0.1, 0.1), 0.0);
}

TEST(FdFirst, SecondOrderConvergence) {
  auto f = [](double x) { return std::exp(x) * std::sin(x); };
  const double x0 = 0.7;
  const double d = std::exp(x0) * (std::sin(x0) + std::cos(x0));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double h = 1e-1; h >= 1e-4 * 0.999; h /= std::sqrt(10.0)) {
    const double lx = std::log10(h);
    const double ly = std::log10(std::abs(fd_first(f, x0, h) - d));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, 2.0, 0.2);
}

TEST(StepRule, Defaults) {
  const double eps = std::numeric_limits<double>::epsilon();
  const auto fd = StepRule::defaults(Method::CentralFD);
  EXPECT_NEAR(fd.h_first, std::cbrt(eps), 1e-20);
  EXPECT_NEAR(fd.h_second, std::pow(eps, 0.25), 1e-20);
  const auto bc = StepRule::defaults(Method::Bicomplex);
  EXPECT_EQ(bc.h_first, 1e-8);
  EXPECT_EQ(bc.h_second, 1e-4);
  const auto hd = StepRule::defaults(Method::HyperDual);
  EXPECT_EQ(hd.h_first, 1.0);
  EXPECT_EQ(hd.h_second, 1.0);
}

TEST(MethodNames, RoundTrip) {
  for (auto m : {Method::CentralFD, Method::Bicomplex, Method::HyperDual}) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("nope"), std::invalid_argument);
}

TEST(BcDerivs, ExampleFunction) {
  const auto s = example_scalar();
  const std::vector<double> x{0.5};
  const auto d = bc_derivs(s.fn, 0, 0, x, 1e-8);
  EXPECT_LE(relerr(s.f1(0.5), d.d_i[0]), 1e-12);
  EXPECT_LE(relerr(s.f2(0.5), bc_derivs(s.fn, 0, 0, x, 1e-4).d_ij[0]), 1e-6);
}

TEST(BcDerivs, BilinearAndSquare) {
  const VectorFunction xy(2, 1, [](auto x, auto y) { y[0] = x[0] * x[1]; });
  const std::vector<double> p{2.0, 3.0};
  const auto d = bc_derivs(xy, 0, 1, p, 1e-10);
  EXPECT_NEAR(d.d_i[0], 3.0, 1e-15);
  EXPECT_NEAR(d.d_j[0], 2.0, 1e-15);
  EXPECT_NEAR(d.d_ij[0], 1.0, 1e-12);
  const auto sq = make_scalar_function([](auto x) { return x * x; });
  for (double h : {1e-1, 1e-3, 1e-6}) EXPECT_EQ(bc_derivs(sq, 0, 0, std::vector<double>{3.0}, h).d_ij[0], 2.0);
}

TEST(HdDerivs, ExampleFunctionAndStepIndependence) {
  const auto s = example_scalar();
  const std::vector<double> x{0.5};
  const auto d1 = hd_derivs(s.fn, 0, 0, x, 1.0);
  EXPECT_LE(relerr(s.f1(0.5), d1.d_i[0]), 1e-13);
  EXPECT_LE(relerr(s.f2(0.5), d1.d_ij[0]), 1e-13);
  // Power-of-two steps scale exactly.
  for (double h : {0x1p-60, 0x1p-20, 0x1p20}) {
    const auto d = hd_derivs(s.fn, 0, 0, x, h);
    EXPECT_EQ(d.d_i[0], d1.d_i[0]) << h;
    EXPECT_EQ(d.d_ij[0], d1.d_ij[0]) << h;
  }
  for (double h : {1e-20, 1e-6, 1e6}) {
    const auto d = hd_derivs(s.fn, 0, 0, x, h);
    EXPECT_LE(relerr(d1.d_i[0], d.d_i[0]), 4e-15) << h;
    EXPECT_LE(relerr(d1.d_ij[0], d.d_ij[0]), 4e-15) << h;
  }
}

TEST(HdDerivs, SinTimesY) {
  const VectorFunction f(2, 1, [](auto x, auto y) { y[0] = sin(x[0]) * x[1]; });
  const auto d = hd_derivs(f, 0, 1, std::vector<double>{0.0, 5.0}, 1.0);
  EXPECT_EQ(d.d_i[0], 5.0);
  EXPECT_EQ(d.d_j[0], 0.0);
  EXPECT_EQ(d.d_ij[0], 1.0);
}

TEST(HdDerivs, MixedPartialSymmetric) {
  const VectorFunction f(3, 2, [](auto x, auto y) {
    y[0] = exp(x[0] * x[1]) * cos(x[2]);
    y[1] = x[0] * x[0] * x[1] / (1.0 + x[2] * x[2]);
  });
  const std::vector<double> p{0.3, -0.8, 1.1};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const auto a = hd_derivs(f, i, j, p, 1.0);
      const auto b = hd_derivs(f, j, i, p, 1.0);
      for (int r = 0; r < 2; ++r) EXPECT_NEAR(a.d_ij[r], b.d_ij[r], 1e-13 * (1 + std::abs(a.d_ij[r])));
    }
  }
}

TEST(Derivest, MethodAgreementOnRandomComposites) {
  const VectorFunction f(1, 1, [](auto x, auto y) { y[0] = sin(x[0] * x[0]) + x[0] * x[0] * x[0] * cos(x[0]); });
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 10; ++k) {
    const std::vector<double> x{u(rng)};
    const auto hd = hd_derivs(f, 0, 0, x, 1.0);
    const double bc1 = bc_derivs(f, 0, 0, x, 1e-8).d_i[0];
    const double bc2 = bc_derivs(f, 0, 0, x, 1e-4).d_ij[0];
    const auto fs = [&](double v) { return eval1(f, v); };
    const double fd1 = fd_first(fs, x[0], 1e-5);
    const double fd2 = fd_second(fs, x[0], 1e-3);
    auto r = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a)); };
    EXPECT_LE(r(hd.d_i[0], bc1), 1e-5);
    EXPECT_LE(r(hd.d_ij[0], bc2), 1e-5);
    EXPECT_LE(r(hd.d_i[0], fd1), 1e-3);
    EXPECT_LE(r(hd.d_ij[0], fd2), 1e-3);
  }
}

TEST(Jacobian, IdentityMap) {
  const VectorFunction id(3, 3, [](auto x, auto y) {
    for (int k = 0; k < 3; ++k) y[k] = x[k];
  });
  const std::vector<double> x{1.0, -2.0, 0.5};
  const auto pat = dense_jacobian(3, 3);
  for (auto m : {Method::CentralFD, Method::Bicomplex, Method::HyperDual}) {
    const auto J = jacobian(id, x, pat, StepRule::defaults(m));
    for (std::size_t k = 0; k < pat.nnz(); ++k) {
      const auto& e = pat.entries()[k];
      EXPECT_NEAR(J.values[k], e.row == e.col ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(Jacobian, EmptyPatternEvaluatesNothing) {
  int calls = 0;
  const VectorFunction f(2, 1, [&calls](auto x, auto y) {
    ++calls;
    y[0] = x[0];
  });
  const JacobianPattern empty(1, 2);
  const auto J = jacobian(f, std::vector<double>{1.0, 2.0}, empty, StepRule::defaults(Method::HyperDual));
  EXPECT_TRUE(J.values.empty());
  EXPECT_EQ(J.evaluations, 0u);
  EXPECT_EQ(calls, 0);
}

TEST(Jacobian, SeedCounts) {
  const std::size_t n = 7;
  const VectorFunction f(n, 2, [](auto x, auto y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      y[0] += x[k] * x[k];
      y[1] += sin(x[k]);
    }
  });
  const std::vector<double> x(n, 0.3);
  const auto pat = dense_jacobian(2, n);
  EXPECT_EQ(jacobian(f, x, pat, StepRule::defaults(Method::HyperDual)).evaluations, (n + 1) / 2);
  EXPECT_EQ(jacobian(f, x, pat, StepRule::defaults(Method::Bicomplex)).evaluations, (n + 1) / 2);
  EXPECT_EQ(jacobian(f, x, pat, StepRule::defaults(Method::CentralFD)).evaluations, 2 * n);
}

TEST(Jacobian, FreeFlyingHyperDualMatchesFd) {
  const VectorFunction dyn(10, 6, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    free_flying_dynamics<T>(x.subspan(0, 6), x.subspan(6, 4), y);
  });
  const std::vector<double> x{-5.0, -4.0, 0.3, -0.2, 0.9, 0.05, 0.4, 0.1, 0.7, 0.2};
  const auto pat = dense_jacobian(6, 10);
  const auto hd = jacobian(dyn, x, pat, StepRule::defaults(Method::HyperDual));
  const auto fd = jacobian(dyn, x, pat, StepRule::defaults(Method::CentralFD));
  for (std::size_t k = 0; k < pat.nnz(); ++k) EXPECT_NEAR(hd.values[k], fd.values[k], 1e-6);
}

TEST(HessianWeighted, Examples) {
  const VectorFunction f(2, 2, [](auto x, auto y) {
    y[0] = x[0] * x[0] + x[1] * x[1];
    y[1] = x[0] * x[1];
  });
  const auto pat = dense_hessian(2);
  const std::vector<double> x{0.4, -1.2};
  for (auto m : {Method::CentralFD, Method::Bicomplex, Method::HyperDual}) {
    const auto rule = StepRule::defaults(m);
    const auto a = hessian_weighted(f, std::vector<double>{1.0, 0.0}, x, pat, rule);
    EXPECT_NEAR(a.values[pat.find(0, 0)], 2.0, 1e-6);
    EXPECT_NEAR(a.values[pat.find(1, 0)], 0.0, 1e-6);
    EXPECT_NEAR(a.values[pat.find(1, 1)], 2.0, 1e-6);
    const auto b = hessian_weighted(f, std::vector<double>{0.0, 3.0}, x, pat, rule);
    EXPECT_NEAR(b.values[pat.find(1, 0)], 3.0, 1e-6);
    EXPECT_NEAR(b.values[pat.find(0, 0)], 0.0, 1e-6);
  }
}

TEST(HessianWeighted, ExampleFunctionHyperDual) {
  const auto s = example_scalar();
  const auto pat = dense_hessian(1);
  const auto h =
      hessian_weighted(s.fn, std::vector<double>{1.0}, std::vector<double>{0.5}, pat, StepRule::defaults(Method::HyperDual));
  EXPECT_LE(relerr(s.f2(0.5), h.values[0]), 1e-13);
}

TEST(RelError, Examples) {
  EXPECT_EQ(rel_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(rel_error(1.0, 1.01), 0.005, 1e-15);
  EXPECT_EQ(rel_error(-3.7, -3.7), 0.0);
}

TEST(ErrorSweep, ShapeAndBehaviour) {
  const auto s = example_scalar();
  const auto grid = log_grid(0.0, -15.0, 31);
  ASSERT_EQ(grid.size(), 31u);
  EXPECT_DOUBLE_EQ(grid.front(), 1.0);
  EXPECT_NEAR(grid.back(), 1e-15, 1e-28);
  const auto rows = error_sweep(s.fn, s.f1, s.f2, 0.5, grid);
  EXPECT_EQ(rows.size(), 31u * 3u * 2u);
  for (const auto& r : rows) {
    if (r.method == Method::HyperDual) {
      EXPECT_LE(r.rel_error, 1e-13);
    }
    if (r.method == Method::Bicomplex && r.order == 1 && r.h <= 1e-7) {
      EXPECT_LE(r.rel_error, 1e-13);
    }
  }
}

TEST(ErrorSweep, CsvRoundTrip) {
  const auto s = example_scalar();
  const auto grid = log_grid(0.0, -15.0, 31);
  const auto rows = error_sweep(s.fn, s.f1, s.f2, 0.5, grid);
  std::stringstream ss;
  write_sweep_csv(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "h,method,order,rel_error");
  const auto back = read_sweep_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].h, rows[k].h);
    EXPECT_EQ(back[k].method, rows[k].method);
    EXPECT_EQ(back[k].order, rows[k].order);
    if (std::isnan(rows[k].rel_error)) {
      EXPECT_TRUE(std::isnan(back[k].rel_error));
    } else {
      EXPECT_EQ(back[k].rel_error, rows[k].rel_error);
    }
  }
}

TEST(Derivest, EvaluationErrorCarriesContext) {
  const VectorFunction f(1, 1, [](auto x, auto y) { y[0] = log(x[0]); });
  const JacobianPattern pat(1, 1, {{0, 0}});
  EXPECT_THROW(jacobian(f, std::vector<double>{-1.0}, pat, StepRule::defaults(Method::HyperDual)), EvaluationError);
}
