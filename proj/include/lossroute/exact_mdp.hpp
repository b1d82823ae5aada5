#pragma once

// Exact computations on the product-space continuous-time chain: the optimal
// loss probability, exact evaluation of stationary deterministic policies,
// and two lower bounds on the optimum.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "lossroute/indices.hpp"
#include "lossroute/instance.hpp"
#include "lossroute/kernels.hpp"
#include "lossroute/split.hpp"
#include "lossroute/state_space.hpp"

namespace lossroute {

inline constexpr int kBlocked = -1;

/// Queue chosen for the next arrival in every joint state (indexed by
/// StateSpace id); kBlocked only in the full state.
using StationaryPolicy = std::vector<int>;

enum class SteadyStateMethod { Auto, Direct, Power };

struct SolverOptions {
    double tol = 1e-10;                       ///< span of the Bellman right-hand side
    std::size_t max_iterations = 1'000'000;   ///< value-iteration sweeps
    std::size_t max_states = 1'000'000;
    Backend backend = Backend::OpenMP;
    SteadyStateMethod steady_state = SteadyStateMethod::Auto;
    std::size_t direct_limit = 20'000;        ///< Auto uses the sparse direct solve up to this size
    double power_tol = 1e-11;                 ///< on ||pi Q||_inf / Lambda for power iteration
};

struct OptimalSolution {
    double z_op = 0;                     ///< minimum loss probability
    StationaryPolicy policy;
    std::vector<double> relative_values; ///< h, with h(empty) = 0
    double residual_span = 0;            ///< range of the Bellman right-hand side at h
    std::size_t iterations = 0;
};

struct PolicyEvaluation {
    double loss_probability = 0;
    double loss_rate = 0;
    double throughput = 0;
    std::vector<double> steady_state;
    double balance_residual = 0;   ///< ||pi Q||_inf
};

/// Relative value iteration on the uniformized chain. Throws CapacityError
/// above opts.max_states and SolverError when the span does not contract.
OptimalSolution optimal_loss(const SystemInstance& inst, const SolverOptions& opts = {});

/// max over states of |z - rhs(x)| for the optimality equations at (z, h).
double bellman_residual(const SystemInstance& inst, double z, const std::vector<double>& h);

/// Throws ValidationError unless the policy only routes to nonfull queues,
/// routes somewhere whenever a queue has room, and blocks in the full state.
void validate_policy(const SystemInstance& inst, const StationaryPolicy& policy);

PolicyEvaluation evaluate_policy(const SystemInstance& inst, const StationaryPolicy& policy,
                                 const SolverOptions& opts = {});

/// Policy that routes by route() over the given tables.
StationaryPolicy index_policy(const SystemInstance& inst, std::span<const IndexTable> tables);

/// Builds the family's tables, materializes the policy, and evaluates it.
/// PI uses `split` when given and solves the Bernoulli split otherwise.
PolicyEvaluation evaluate_index_policy(const SystemInstance& inst, Family family,
                                       const SplitSolution* split = nullptr,
                                       const SolverOptions& opts = {});

/// Loss-probability form of the relaxation bound: max(0, sum_k B_k(lambda) - (K - 1)).
double bound_lbr(const SystemInstance& inst);

/// Loss probability of the pooled M/M/1/N queue with rate sum_k m_k mu_k and
/// N = sum_k n_k.
double bound_lbp(const SystemInstance& inst);

void write_policy_csv(std::ostream& out, const SystemInstance& inst,
                      const StationaryPolicy& policy);
void write_steady_state_csv(std::ostream& out, const PolicyEvaluation& eval);

} // namespace lossroute
