// Serial reference path against the OpenMP kernels on the same inputs.
#include <benchmark/benchmark.h>

#include "immersed/assembly.hpp"
#include "immersed/solvers.hpp"

using namespace immersed;

namespace {

const LevelSet kGeo = LevelSet::circle({0.51, 0.49}, 0.3);

Execution exec_of(const benchmark::State& st) { return st.range(1) ? Execution::Parallel : Execution::Serial; }

void BM_Classify(benchmark::State& st) {
  auto mesh = BackgroundMesh::unit_square(int(st.range(0)));
  QuadConfig q = QuadConfig::for_degree(1, 8);
  for (auto _ : st) benchmark::DoNotOptimize(classify_elements(mesh, kGeo, q, exec_of(st)));
}

void BM_CutQuadrature(benchmark::State& st) {
  auto mesh = BackgroundMesh::unit_square(int(st.range(0)));
  QuadConfig q = QuadConfig::for_degree(2, 8);
  auto active = classify_elements(mesh, kGeo, q);
  for (auto _ : st) benchmark::DoNotOptimize(build_cut_quadratures(active, q, exec_of(st)));
}

void BM_Assemble(benchmark::State& st) {
  auto mesh = BackgroundMesh::unit_square(int(st.range(0)));
  StabilizationSpec stab;
  stab.mode = StabMode::GhostFace;
  auto d = discretize(mesh, kGeo, 2, QuadConfig::for_degree(2), stab);
  ProblemSpec prob{manufactured("sinsin"), CutBoundary::Dirichlet};
  for (auto _ : st) benchmark::DoNotOptimize(assemble(d, prob, stab, exec_of(st)));
}

void BM_AdditiveSchwarz(benchmark::State& st) {
  auto mesh = BackgroundMesh::unit_square(int(st.range(0)));
  StabilizationSpec stab;
  auto d = discretize(mesh, kGeo, 2, QuadConfig::for_degree(2), stab);
  auto sys = assemble(d, {manufactured("sinsin"), CutBoundary::Dirichlet}, stab);
  auto blocks = select_blocks(d, sys, BlockSpec{BlockStrategy::AllElements, 0.0});
  SchwarzPreconditioner M(sys.A, blocks, SchwarzMode::Additive, 1e-12, exec_of(st));
  Eigen::VectorXd r = Eigen::VectorXd::Ones(sys.size());
  for (auto _ : st) benchmark::DoNotOptimize(M.apply(r));
}

}  // namespace

#define KERNEL_ARGS ->ArgsProduct({{32, 64}, {0, 1}})->ArgNames({"n", "omp"})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_Classify) KERNEL_ARGS;
BENCHMARK(BM_CutQuadrature) KERNEL_ARGS;
BENCHMARK(BM_Assemble) KERNEL_ARGS;
BENCHMARK(BM_AdditiveSchwarz) KERNEL_ARGS;

BENCHMARK_MAIN();
