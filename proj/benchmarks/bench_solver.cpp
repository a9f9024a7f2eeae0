#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "manisolve/geometry.hpp"
#include "manisolve/problem.hpp"
#include "manisolve/sqp.hpp"

using namespace manisolve;

namespace {

struct Fixture {
  EigenInstance instance;
  Problem problem;
  Eigen::VectorXd x;

  explicit Fixture(int n)
      : instance(make_instance(n, 50.0, 31)),
        problem(eigenvalue_problem(instance)),
        x(sample_initialization(instance.x_star, 0.1, 32)) {}
};

void bm_geometry_frame(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(frame_at(fix.problem, fix.x));
  }
}

void bm_sqp_step(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sqp_step(fix.problem, fix.x, 0.01));
  }
}

void bm_restricted_hessian(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(riemannian_hessian(fix.problem, fix.instance.x_star));
  }
}

void bm_full_solve(benchmark::State& state) {
  const Fixture fix(static_cast<int>(state.range(0)));
  SolverConfig config;
  config.eta = 0.01;
  config.max_iters = 100;
  config.grad_tol = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sqp(fix.problem, fix.x, config));
  }
  state.SetItemsProcessed(state.iterations() * config.max_iters);
}

}  // namespace

BENCHMARK(bm_geometry_frame)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(bm_sqp_step)->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(bm_restricted_hessian)->Arg(50)->Arg(200);
BENCHMARK(bm_full_solve)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
