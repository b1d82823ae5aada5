#pragma once

// Per-queue routing index tables and the lowest-index routing rule.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lossroute/instance.hpp"

namespace lossroute {

enum class Family { SQ, SED, NQ, FAS, RB, PI };

inline constexpr Family kAllFamilies[] = {Family::SQ, Family::SED, Family::NQ,
                                          Family::FAS, Family::RB, Family::PI};

std::string_view family_name(Family f);
/// Case-insensitive; nullopt for unknown names.
std::optional<Family> parse_family(std::string_view name);

/// Index values theta(x) for x = 0..n-1 of one queue. Lower is preferred.
/// Values are only comparable across queues within one family.
struct IndexTable {
    std::size_t queue_id = 0;
    std::vector<double> values;
};

/// One step of the coupled RB recursion.
struct RbRecursionState {
    double theta;
    double y;
    double w;
};

/// Index values closer than this are treated as tied in route().
inline constexpr double kTieTolerance = 1e-12;

IndexTable sq_index(const QueueParams& q, std::size_t queue_id = 0);
IndexTable sed_index(const QueueParams& q, std::size_t queue_id = 0);
IndexTable fas_index(const QueueParams& q, std::size_t queue_id = 0);

/// max_k 1/mu_k, the waiting offset used by the never-queue index.
double nq_constant(const SystemInstance& inst);

/// Throws DomainError if c < 1/mu.
IndexTable nq_index(const QueueParams& q, double c, std::size_t queue_id = 0);

/// Second-order restless-bandit index via the coupled first-order recursions
/// in (theta, y, w). O(n).
IndexTable rb_index_recursive(const QueueParams& q, double lambda, std::size_t queue_id = 0);

/// Full state of the recursion above, one entry per x = 0..n-1.
std::vector<RbRecursionState> rb_recursion_trace(const QueueParams& q, double lambda);

/// Same table from the closed form in terms of Erlang-C.
IndexTable rb_index_closed(const QueueParams& q, double lambda, std::size_t queue_id = 0);

/// Same table from mean-number and blocking differences of M/M/m/x versus
/// M/M/m/(x+1), evaluated in extended precision. Used as an oracle.
IndexTable rb_index_ratio_oracle(const QueueParams& q, double lambda, std::size_t queue_id = 0);

namespace detail {
/// Closed-form RB value for m <= x < n, rho != 1 branch.
double rb_closed_general(const QueueParams& q, double lambda, int x);
/// Closed-form RB value for m <= x < n at rho == 1 (lambda = m mu).
double rb_closed_unit_load(const QueueParams& q, int x);
} // namespace detail

/// Policy-improvement index over the Bernoulli split that sends
/// lambda_star to this queue and loses phi_star = lambda_star B_{m,n}.
/// Computed with the first-order linear recursion.
IndexTable pi_index(const QueueParams& q, double lambda_star, double phi_star,
                    std::size_t queue_id = 0);

/// The same recursion divided through by mu:
///   theta(0) = B,  theta(x) = (r B + min(x, m) theta(x-1)) / r,  B = B_{m,n}(r).
/// It depends on (m, n, r) only, so stations sharing them get identical tables.
IndexTable pi_index_at_load(const QueueParams& q, double offered_load, std::size_t queue_id = 0);

/// Same table from its closed form; phi_star is implied by lambda_star.
IndexTable pi_index_closed(const QueueParams& q, double lambda_star, std::size_t queue_id = 0);

/// Tables of one family for every queue of inst. PI needs the offered loads
/// r_k* = lambda_k* / mu_k of the Bernoulli split (SplitSolution::offered_loads);
/// other families ignore split_loads.
std::vector<IndexTable> build_index_tables(const SystemInstance& inst, Family family,
                                           std::span<const double> split_loads = {});

/// Queue that receives an arrival in joint state `state`: the nonfull queue
/// with the lowest index, ties going to larger m*mu and then to the smaller
/// queue id. nullopt when every queue is full (the arrival is blocked).
std::optional<std::size_t> route(const SystemInstance& inst, std::span<const IndexTable> tables,
                                 std::span<const int> state);

} // namespace lossroute
