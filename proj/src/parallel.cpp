#include "kdvtower/parallel.hpp"

#include <thread>

namespace kdvtower {

int resolve_jobs(int jobs) {
    if (jobs == 1) return 1;
    if (jobs > 1) return jobs;
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

} // namespace kdvtower
