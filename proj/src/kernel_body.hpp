#pragma once

// Per-state bodies shared by the serial and OpenMP kernels.

#include <limits>
#include <span>

#include "lossroute/kernels.hpp"

namespace lossroute::detail {

inline double bellman_state(const ChainModel& model, std::span<const double> h, std::size_t s,
                            int& action) {
    const auto& space = model.space;
    const auto occ = space.occupancy(s);
    const double here = h[s];
    double rhs = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        if (occ[k] > 0) rhs += model.departure[k][occ[k]] * (h[s - space.stride(k)] - here);
    }
    if (s == space.full_state()) {
        action = -1;
        return rhs + 1.0;
    }
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        if (occ[k] < space.buffer(k)) {
            const double v = h[s + space.stride(k)];
            if (v < best) {
                best = v;
                arg = static_cast<int>(k);
            }
        }
    }
    action = arg;
    return rhs + model.lambda * (best - here);
}

inline double flow_state(const ChainModel& model, std::span<const int> action,
                         std::span<const double> pi, std::size_t y) {
    const auto& space = model.space;
    const auto occ = space.occupancy(y);
    double out = action[y] >= 0 ? model.lambda : 0.0;
    double in = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        const std::size_t stride = space.stride(k);
        if (occ[k] > 0) {
            out += model.departure[k][occ[k]];
            if (action[y - stride] == static_cast<int>(k)) in += model.lambda * pi[y - stride];
        }
        if (occ[k] < space.buffer(k)) in += model.departure[k][occ[k] + 1] * pi[y + stride];
    }
    return in - out * pi[y];
}

} // namespace lossroute::detail
