#include <algorithm>

#include "kernel_body.hpp"
#include "lossroute/kernels.hpp"

namespace lossroute {

ChainModel::ChainModel(const SystemInstance& inst)
    : space(inst), lambda(inst.lambda()), uniformization(inst.lambda() + inst.total_capacity()) {
    departure.resize(inst.size());
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const auto& q = inst.queue(k);
        departure[k].resize(static_cast<std::size_t>(q.n) + 1);
        for (int x = 0; x <= q.n; ++x) departure[k][x] = q.departure_rate(x);
    }
}

SweepBounds bellman_sweep_serial(const ChainModel& model, std::span<const double> h,
                                 std::span<double> rhs, std::span<int> action) {
    SweepBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t s = 0; s < model.space.size(); ++s) {
        rhs[s] = detail::bellman_state(model, h, s, action[s]);
        b.min = std::min(b.min, rhs[s]);
        b.max = std::max(b.max, rhs[s]);
    }
    return b;
}

void balance_flow_serial(const ChainModel& model, std::span<const int> action,
                         std::span<const double> pi, std::span<double> flow) {
    for (std::size_t y = 0; y < model.space.size(); ++y) {
        flow[y] = detail::flow_state(model, action, pi, y);
    }
}

SweepBounds bellman_sweep(Backend backend, const ChainModel& model, std::span<const double> h,
                          std::span<double> rhs, std::span<int> action) {
    return backend == Backend::OpenMP ? bellman_sweep_omp(model, h, rhs, action)
                                      : bellman_sweep_serial(model, h, rhs, action);
}

void balance_flow(Backend backend, const ChainModel& model, std::span<const int> action,
                  std::span<const double> pi, std::span<double> flow) {
    if (backend == Backend::OpenMP) {
        balance_flow_omp(model, action, pi, flow);
    } else {
        balance_flow_serial(model, action, pi, flow);
    }
}

} // namespace lossroute
