#pragma once

// Data-parallel sweeps over the joint state space. Each kernel has a serial
// reference version and an OpenMP version; both compute every state with the
// same floating-point operations in the same order, so their outputs are
// bitwise identical for any thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "lossroute/instance.hpp"
#include "lossroute/state_space.hpp"

namespace lossroute {

enum class Backend { Serial, OpenMP };

/// Uniformized product-space chain shared by the kernels.
struct ChainModel {
    explicit ChainModel(const SystemInstance& inst);

    StateSpace space;
    double lambda;
    /// lambda + sum_k m_k mu_k, an upper bound on every state's exit rate.
    double uniformization;
    /// departure[k][x] = min(x, m_k) mu_k.
    std::vector<std::vector<double>> departure;
};

struct SweepBounds {
    double min = 0;
    double max = 0;
    double span() const noexcept { return max - min; }
};

/// One average-cost Bellman sweep in continuous-time form. For every state
///   rhs[s] = cost(s) + min_k lambda (h[s + e_k] - h[s]) + sum_l mu_l(x_l) (h[s - e_l] - h[s])
/// with cost 1 only in the full state, the min over nonfull queues (smallest
/// queue id on exact ties) and action[s] = argmin, or -1 in the full state.
/// Returns the range of rhs, which brackets the optimal loss probability.
SweepBounds bellman_sweep_serial(const ChainModel& model, std::span<const double> h,
                                 std::span<double> rhs, std::span<int> action);
SweepBounds bellman_sweep_omp(const ChainModel& model, std::span<const double> h,
                              std::span<double> rhs, std::span<int> action);

/// flow[y] = (pi Q)(y) for the generator Q of the chain under `action`.
void balance_flow_serial(const ChainModel& model, std::span<const int> action,
                         std::span<const double> pi, std::span<double> flow);
void balance_flow_omp(const ChainModel& model, std::span<const int> action,
                      std::span<const double> pi, std::span<double> flow);

SweepBounds bellman_sweep(Backend backend, const ChainModel& model, std::span<const double> h,
                          std::span<double> rhs, std::span<int> action);
void balance_flow(Backend backend, const ChainModel& model, std::span<const int> action,
                  std::span<const double> pi, std::span<double> flow);

/// Threads the OpenMP kernels will use (1 without OpenMP).
int kernel_threads();
void set_kernel_threads(int n);

} // namespace lossroute
