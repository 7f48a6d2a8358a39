// Compares the serial reference paths against their OpenMP counterparts:
// the randomized verification trial loop and the dense weighted matvec
// behind operator_norm. Outputs are checked to be identical before timing,
// since per-trial seeding makes the results schedule-independent.

#include "kdvtower/morphism.hpp"
#include "kdvtower/parallel.hpp"
#include "kdvtower/random_field.hpp"
#include "kdvtower/shift.hpp"

#include <chrono>
#include <cstdio>
#include <string>

using namespace kdvtower;

namespace {

double wall(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void bench_trials(int jobs_parallel) {
    const SpectralGrid grid(64);
    const Morphism p2 = second_kdv_structure(grid);
    VerifyOptions options;
    options.trials = 512;
    options.seed = 11;
    options.modes_list = {64};

    VerificationReport serial_report, parallel_report;
    options.jobs = 1;
    const double t_serial = wall([&] { serial_report = verify_poisson(p2, options); });
    options.jobs = jobs_parallel;
    const double t_parallel = wall([&] { parallel_report = verify_poisson(p2, options); });

    const bool identical = report_to_json(serial_report) == report_to_json(parallel_report);
    std::printf("verify_poisson trials=%d      serial %7.3fs  omp(%d) %7.3fs  speedup %5.2fx  %s\n",
                options.trials, t_serial, jobs_parallel, t_parallel, t_serial / t_parallel,
                identical ? "outputs identical" : "OUTPUT MISMATCH");
}

void bench_dense_norm(int jobs_parallel) {
    const int m_count = 512;
    const SpectralGrid grid(m_count);
    GaussianSource rng(5);
    DenseAction a;
    a.size = m_count;
    a.entries.resize(static_cast<size_t>(m_count) * m_count);
    for (auto& z : a.entries) z = Complex(rng.normal(), rng.normal());
    const ShiftOperator op("dense", ShiftType{1, 1}, 2, grid, a);

    // The matvec kernel reads the worker count from OpenMP; pin it per run.
    PowerIterationOptions pi;
    pi.max_iterations = 200;
    pi.tolerance = 0.0; // run the full iteration budget for stable timing

    OperatorNormResult serial_result, parallel_result;
#if defined(_OPENMP)
    omp_set_num_threads(1);
#endif
    const double t_serial = wall([&] { serial_result = operator_norm(op, pi); });
#if defined(_OPENMP)
    omp_set_num_threads(jobs_parallel);
#endif
    const double t_parallel = wall([&] { parallel_result = operator_norm(op, pi); });

    const double diff = std::abs(serial_result.value - parallel_result.value) /
                        (serial_result.value + 1e-300);
    std::printf("dense operator_norm M=%d    serial %7.3fs  omp(%d) %7.3fs  speedup %5.2fx  "
                "rel_diff %.2e\n",
                m_count, t_serial, jobs_parallel, t_parallel, t_serial / t_parallel, diff);
}

} // namespace

int main(int argc, char** argv) {
    const int jobs = argc > 1 ? std::stoi(argv[1]) : resolve_jobs(0);
    std::printf("workers for the parallel runs: %d\n", jobs);
    bench_trials(jobs);
    bench_dense_norm(jobs);
    return 0;
}
