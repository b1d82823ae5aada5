#include "lossroute/state_space.hpp"

#include <string>

#include "lossroute/errors.hpp"

namespace lossroute {

StateSpace::StateSpace(const SystemInstance& inst) {
    const std::size_t K = inst.size();
    buffers_.resize(K);
    strides_.resize(K);
    for (std::size_t k = K; k-- > 0;) {
        buffers_[k] = inst.queue(k).n;
        strides_[k] = size_;
        size_ *= static_cast<std::size_t>(buffers_[k]) + 1;
    }
    occupancy_.resize(size_ * K);
    for (std::size_t s = 0; s < size_; ++s) {
        for (std::size_t k = 0; k < K; ++k) {
            occupancy_[s * K + k] =
                static_cast<int>((s / strides_[k]) % (static_cast<std::size_t>(buffers_[k]) + 1));
        }
    }
}

std::size_t StateSpace::id(std::span<const int> x) const {
    if (x.size() != queues()) throw ValidationError("joint state has the wrong number of queues");
    std::size_t s = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < 0 || x[k] > buffers_[k]) {
            throw ValidationError("joint state component " + std::to_string(k) + " out of range");
        }
        s += static_cast<std::size_t>(x[k]) * strides_[k];
    }
    return s;
}

JointState StateSpace::state(std::size_t id) const {
    auto occ = occupancy(id);
    return {occ.begin(), occ.end()};
}

} // namespace lossroute
