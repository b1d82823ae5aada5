#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernel_body.hpp"
#include "lossroute/kernels.hpp"

namespace lossroute {

SweepBounds bellman_sweep_omp(const ChainModel& model, std::span<const double> h,
                              std::span<double> rhs, std::span<int> action) {
    const auto n = static_cast<std::int64_t>(model.space.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : lo) reduction(max : hi)
    for (std::int64_t s = 0; s < n; ++s) {
        const auto i = static_cast<std::size_t>(s);
        const double v = detail::bellman_state(model, h, i, action[i]);
        rhs[i] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

void balance_flow_omp(const ChainModel& model, std::span<const int> action,
                      std::span<const double> pi, std::span<double> flow) {
    const auto n = static_cast<std::int64_t>(model.space.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t y = 0; y < n; ++y) {
        const auto i = static_cast<std::size_t>(y);
        flow[i] = detail::flow_state(model, action, pi, i);
    }
}

int kernel_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_kernel_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace lossroute
