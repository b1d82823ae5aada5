#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lossroute/instance.hpp"

namespace lossroute {

/// Occupancy vector (x_1, ..., x_K) with 0 <= x_k <= n_k.
using JointState = std::vector<int>;

/// Mixed-radix enumeration of the joint states, radix n_k + 1 per queue, the
/// last queue varying fastest. Id 0 is the empty system and the last id is
/// the full system. Occupancies are tabulated once for the sweep kernels.
class StateSpace {
public:
    explicit StateSpace(const SystemInstance& inst);

    std::size_t size() const noexcept { return size_; }
    std::size_t queues() const noexcept { return buffers_.size(); }
    std::size_t full_state() const noexcept { return size_ - 1; }

    int buffer(std::size_t k) const noexcept { return buffers_[k]; }
    std::size_t stride(std::size_t k) const noexcept { return strides_[k]; }

    std::span<const int> occupancy(std::size_t id) const noexcept {
        return {occupancy_.data() + id * queues(), queues()};
    }

    std::size_t id(std::span<const int> x) const;
    JointState state(std::size_t id) const;

private:
    std::vector<int> buffers_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
    std::vector<int> occupancy_;
};

} // namespace lossroute
