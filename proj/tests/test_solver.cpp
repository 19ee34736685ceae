#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "radau/compare.hpp"
#include "radau/problems.hpp"
#include "radau/solver.hpp"

using namespace radau;

namespace {

FunctionNlp qp_bound() {
  // min (x - 0)^2  s.t.  x >= 1 as a constraint row
  return FunctionNlp(VectorFunction(1, 1, [](auto x, auto f) { f[0] = x[0] * x[0]; }),
                     VectorFunction(1, 1, [](auto x, auto g) { g[0] = x[0]; }), {-kInf}, {kInf}, {1.0}, {kInf},
                     {3.0});
}

FunctionNlp circle() {
  // min -(x + y)  s.t.  x^2 + y^2 = 1
  return FunctionNlp(VectorFunction(2, 1, [](auto x, auto f) { f[0] = -(x[0] + x[1]); }),
                     VectorFunction(2, 1, [](auto x, auto g) { g[0] = x[0] * x[0] + x[1] * x[1]; }), {-kInf, -kInf},
                     {kInf, kInf}, {1.0}, {1.0}, {0.5, 0.2});
}

SolveResult solve_ocp(const Ocp& ocp, std::size_t K, std::size_t Nk, Engine e, const NlpProblem** out = nullptr) {
  static thread_local std::unique_ptr<NlpProblem> keep;
  keep = std::make_unique<NlpProblem>(ocp, std::vector<Mesh>{Mesh::uniform(K, Nk)}, engine_detector(e));
  if (out) *out = keep.get();
  const TranscribedNlp t(*keep, StepRule::defaults(engine_method(e)));
  return solve(t, SolverOptions{});
}

}  // namespace

TEST(Solver, BoundConstrainedQuadratic) {
  const auto nlp = qp_bound();
  const auto r = solve(nlp, SolverOptions{});
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
  // f' + lambda g' = 0 at the solution.
  EXPECT_NEAR(r.lambda[0], -2.0, 1e-5);
}

TEST(Solver, VariableBoundsOnly) {
  const FunctionNlp nlp(VectorFunction(2, 1, [](auto x, auto f) { f[0] = (x[0] - 2) * (x[0] - 2) + (x[1] + 1) * (x[1] + 1); }),
                        VectorFunction(2, 0, [](auto, auto) {}), {0.0, 0.0}, {1.0, 1.0}, {}, {}, {0.5, 0.5});
  const auto r = solve(nlp, SolverOptions{});
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.0, 1e-6);
}

TEST(Solver, EqualityOnCircle) {
  const auto nlp = circle();
  const auto r = solve(nlp, SolverOptions{});
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  EXPECT_NEAR(r.x[0], std::numbers::sqrt2 / 2, 1e-6);
  EXPECT_NEAR(r.x[1], std::numbers::sqrt2 / 2, 1e-6);
  EXPECT_LE(r.constraint_violation, 1e-7);
}

TEST(Solver, ConstraintViolation) {
  const auto nlp = circle();
  const std::vector<double> x{2.0, 0.0};
  EXPECT_DOUBLE_EQ(constraint_violation(nlp, x), 3.0);
  const FunctionNlp boxed(VectorFunction(1, 1, [](auto x, auto f) { f[0] = x[0]; }),
                          VectorFunction(1, 0, [](auto, auto) {}), {0.0}, {1.0}, {}, {}, {0.5});
  const std::vector<double> far{-0.25};
  EXPECT_DOUBLE_EQ(constraint_violation(boxed, far), 0.25);
}

TEST(Solver, LinearOcpRecoversStraightLine) {
  const NlpProblem* nlp = nullptr;
  const auto r = solve_ocp(linear_test_problem(), 1, 5, Engine::HD, &nlp);
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  const auto t = phase_times(*nlp, 0, r.x);
  const auto& pl = nlp->layout().phases[0];
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(r.x[pl.Y(i, 0)], t[i], 1e-5);
  EXPECT_NEAR(r.objective, 1.0, 1e-5);
}

TEST(Solver, LqRegulatorMatchesAnalytic) {
  const NlpProblem* nlp = nullptr;
  const auto r = solve_ocp(lq_regulator_problem(), 4, 6, Engine::HD, &nlp);
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  const auto t = phase_times(*nlp, 0, r.x);
  const auto& pl = nlp->layout().phases[0];
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(r.x[pl.Y(i, 0)], std::sinh(1.0 - t[i]) / std::sinh(1.0), 1e-5);
  }
  for (std::size_t i = 0; i < pl.n; ++i) {
    EXPECT_NEAR(r.x[pl.U(i, 0)], -std::cosh(1.0 - t[i]) / std::sinh(1.0), 1e-4);
  }
  EXPECT_NEAR(r.objective, 0.5 * std::cosh(1.0) / std::sinh(1.0), 1e-5);
}

TEST(Solver, FreeFlyingEnginesAgree) {
  double ref = 0.0;
  for (auto e : {Engine::OC, Engine::EC, Engine::BC, Engine::HD}) {
    const auto r = solve_ocp(free_flying_robot(), 2, 5, e);
    ASSERT_TRUE(r.stats.converged) << engine_name(e) << ' ' << r.stats.status;
    if (e == Engine::OC) ref = r.objective;
    EXPECT_NEAR(r.objective, ref, 1e-6 * std::abs(ref)) << engine_name(e);
    EXPECT_LE(r.constraint_violation, 1e-6);
  }
}

TEST(Solver, StationIsFeasible) {
  const auto r = solve_ocp(space_station(), 2, 5, Engine::HD);
  ASSERT_TRUE(r.stats.converged) << r.stats.status;
  EXPECT_LE(r.constraint_violation, 1e-6);
}

TEST(Solver, Deterministic) {
  const auto a = solve_ocp(free_flying_robot(), 2, 5, Engine::HD);
  const auto b = solve_ocp(free_flying_robot(), 2, 5, Engine::HD);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.stats.I, b.stats.I);
  EXPECT_EQ(a.stats.mu_history, b.stats.mu_history);
}

TEST(Solver, StatsInvariants) {
  const auto r = solve_ocp(free_flying_robot(), 2, 5, Engine::BC);
  const auto& s = r.stats;
  ASSERT_FALSE(s.mu_history.empty());
  for (std::size_t k = 1; k < s.mu_history.size(); ++k) EXPECT_LE(s.mu_history[k], s.mu_history[k - 1]);
  EXPECT_GT(s.I, 0u);
  EXPECT_GT(s.T, 0.0);
  EXPECT_GE(s.derivative_time, 0.0);
  EXPECT_LE(s.derivative_time, s.T);
  EXPECT_NEAR(s.Phi, 1000.0 * s.derivative_time / static_cast<double>(s.I), 1e-9);
}

TEST(Solver, IterationLimitIsReported) {
  SolverOptions o;
  o.max_iter = 2;
  const NlpProblem nlp(free_flying_robot(), {Mesh::uniform(2, 5)}, Detector::Exact);
  const TranscribedNlp t(nlp, StepRule::defaults(Method::HyperDual));
  const auto r = solve(t, o);
  EXPECT_FALSE(r.stats.converged);
  EXPECT_LE(r.stats.I, 2u);
  EXPECT_FALSE(r.stats.status.empty());
}

TEST(Solver, RejectsWrongStartSize) {
  const auto nlp = circle();
  const std::vector<double> x0{1.0};
  EXPECT_THROW(solve(nlp, SolverOptions{}, x0), std::invalid_argument);
}
