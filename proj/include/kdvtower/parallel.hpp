#ifndef KDVTOWER_PARALLEL_HPP
#define KDVTOWER_PARALLEL_HPP

#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace kdvtower {

// Number of workers a jobs request resolves to (jobs <= 0 means "all cores").
int resolve_jobs(int jobs);

/** Run n independent trials and collect fn(i) into a slot-per-trial vector.
 *
 * jobs == 1 is the serial reference path; any other value fans the loop out
 * with OpenMP. Each trial writes only its own slot and derives its own RNG
 * stream from the trial index, so the output is identical for every jobs
 * value and schedule.
 */
template <class T, class Fn>
std::vector<T> run_trials(int n, int jobs, Fn&& fn) {
    std::vector<T> results(static_cast<size_t>(n));
    const int workers = resolve_jobs(jobs);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) results[static_cast<size_t>(i)] = fn(i);
        return results;
    }
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int i = 0; i < n; ++i) results[static_cast<size_t>(i)] = fn(i);
#else
    for (int i = 0; i < n; ++i) results[static_cast<size_t>(i)] = fn(i);
#endif
    return results;
}

} // namespace kdvtower

#endif
