#include <benchmark/benchmark.h>

#include <numeric>

#include "confgap/assembly.hpp"
#include "confgap/concavity.hpp"
#include "confgap/eigensolver.hpp"
#include "confgap/mesh.hpp"

using namespace confgap;

namespace {

struct Fixture {
    Domain2D domain = Domain2D::hyperbolic_circle({0.05, -0.02}, 0.25, 512);
    WeightedProblem problem = laplace_beltrami_problem(domain);
    TriMesh mesh = triangulate(domain, 0.004);
    EigenResult eig = solve_lowest(assemble(problem, mesh), 2);
    std::vector<int> all = [this] {
        std::vector<int> v(mesh.vertices.size());
        std::iota(v.begin(), v.end(), 0);
        return v;
    }();
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_AssembleSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(assemble_serial(f.problem, f.mesh));
}

void BM_AssembleParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(assemble(f.problem, f.mesh));
}

void BM_DiameterSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(diameter_serial(f.domain, ConformalChart::poincare_disk()));
}

void BM_DiameterParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(diameter(f.domain, ConformalChart::poincare_disk()));
}

void BM_FitSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(fit_local_polynomials_serial(f.mesh, f.eig.u1(), f.all));
}

void BM_FitParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(fit_local_polynomials(f.mesh, f.eig.u1(), f.all));
}

void BM_LogHessianSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(log_hessian_field_serial(f.eig, f.mesh, ConformalChart::poincare_disk()));
}

void BM_LogHessianParallel(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(log_hessian_field(f.eig, f.mesh, ConformalChart::poincare_disk()));
}

}  // namespace

BENCHMARK(BM_AssembleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiameterSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiameterParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogHessianSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LogHessianParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
