// Serial vs OpenMP-parallel derivative assembly, per engine and problem size.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "radau/problems.hpp"
#include "radau/solver.hpp"
#include "radau/transcription.hpp"

using namespace radau;

namespace {

const char* const kProblems[] = {"freeflying", "climb", "station"};

struct Setup {
  std::unique_ptr<NlpProblem> nlp;
  std::vector<double> z, lambda;
};

Setup make(std::size_t problem, std::size_t K, Execution ex) {
  Setup s;
  s.nlp = std::make_unique<NlpProblem>(problem_by_name(kProblems[problem]), std::vector<Mesh>{Mesh::uniform(K, 5)},
                                       Detector::Exact);
  s.nlp->set_execution(ex);
  s.z = s.nlp->initial_guess();
  s.lambda.resize(s.nlp->n_g());
  for (std::size_t k = 0; k < s.lambda.size(); ++k) s.lambda[k] = std::sin(1.0 + static_cast<double>(k));
  return s;
}

void label(benchmark::State& state, const Setup& s, Method m, Execution ex) {
  state.SetLabel(std::string(kProblems[state.range(0)]) + " K=" + std::to_string(state.range(1)) + " " +
                 std::string(method_name(m)) + (ex == Execution::Parallel ? " parallel" : " serial"));
  state.counters["n"] = static_cast<double>(s.nlp->n_z());
}

template <Method M, Execution E>
void BM_Jacobian(benchmark::State& state) {
  const auto s = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), E);
  const auto rule = StepRule::defaults(M);
  std::vector<double> v(s.nlp->jacobian_pattern().nnz());
  for (auto _ : state) {
    s.nlp->jacobian_values(s.z, v, rule);
    benchmark::DoNotOptimize(v.data());
  }
  label(state, s, M, E);
}

template <Method M, Execution E>
void BM_Hessian(benchmark::State& state) {
  const auto s = make(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), E);
  const auto rule = StepRule::defaults(M);
  std::vector<double> v(s.nlp->hessian_pattern().nnz());
  for (auto _ : state) {
    s.nlp->hessian_values(s.z, 1.0, s.lambda, v, rule);
    benchmark::DoNotOptimize(v.data());
  }
  label(state, s, M, E);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int p = 0; p < 3; ++p) {
    for (int K : {4, 16, 64}) b->Args({p, K});
  }
}

template <Execution E>
void BM_SolveFreeFlying(benchmark::State& state) {
  const NlpProblem base(free_flying_robot(), {Mesh::uniform(static_cast<std::size_t>(state.range(1)), 5)},
                        Detector::Exact);
  NlpProblem nlp = base;
  nlp.set_execution(E);
  const TranscribedNlp t(nlp, StepRule::defaults(Method::HyperDual));
  for (auto _ : state) {
    auto r = solve(t, SolverOptions{});
    benchmark::DoNotOptimize(r.objective);
  }
}

}  // namespace

BENCHMARK(BM_Jacobian<Method::CentralFD, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian<Method::CentralFD, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian<Method::Bicomplex, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian<Method::Bicomplex, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian<Method::HyperDual, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian<Method::HyperDual, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::CentralFD, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::CentralFD, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::Bicomplex, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::Bicomplex, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::HyperDual, Execution::Serial>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Hessian<Method::HyperDual, Execution::Parallel>)->Apply(sizes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveFreeFlying<Execution::Serial>)->Args({0, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveFreeFlying<Execution::Parallel>)->Args({0, 8})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
