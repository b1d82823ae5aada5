#include "lossroute/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lossroute/erlang.hpp"
#include "lossroute/errors.hpp"

namespace lossroute {

namespace {

// Marginal loss rate as a function of the offered load; phi'(lambda) only
// depends on lambda through r = lambda / mu.
double marginal_at_load(int m, int n, double r) {
    if (r == 0) return 0;
    return blocking_mmn(m, n, r) + r * blocking_mmn_derivative(m, n, r);
}

double total_allocation(const SystemInstance& inst, double y, std::vector<double>* loads) {
    double total = 0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const auto& q = inst.queue(k);
        const double r = inner_offered_load(q.m, q.n, y, inst.lambda() / q.mu);
        if (loads) (*loads)[k] = r;
        total += r * q.mu;
    }
    return total;
}

} // namespace

double queue_loss_rate(const QueueParams& q, double lam_k) {
    if (lam_k < 0) throw DomainError("queue_loss_rate: negative arrival rate");
    if (lam_k == 0) return 0;
    return lam_k * blocking_mmn(q.m, q.n, lam_k / q.mu);
}

double queue_loss_derivative(const QueueParams& q, double lam_k) {
    if (lam_k < 0) throw DomainError("queue_loss_derivative: negative arrival rate");
    if (lam_k == 0) return 0;
    const double r = lam_k / q.mu;
    return blocking_mmn(q.m, q.n, r) + r * blocking_mmn_derivative(q.m, q.n, r);
}

double inner_allocation(const QueueParams& q, double y, double lambda, double tol) {
    if (!(tol > 0)) throw DomainError("inner_allocation: tolerance must be positive");
    if (y <= 0) return 0;
    if (y >= queue_loss_derivative(q, lambda)) return lambda;
    double lo = 0, hi = lambda;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (queue_loss_derivative(q, mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double inner_offered_load(int m, int n, double y, double load_cap) {
    if (y <= 0) return 0;
    if (y >= marginal_at_load(m, n, load_cap)) return load_cap;
    // The bracket grows from a fixed start, not from load_cap, so stations
    // with equal (m, n) follow the same bisection path.
    double lo = 0, hi = 1;
    while (marginal_at_load(m, n, hi) < y) {
        lo = hi;
        hi *= 2;
    }
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (marginal_at_load(m, n, mid) < y) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::min(0.5 * (lo + hi), load_cap);
}

double split_dual_value(const SystemInstance& inst, double y) {
    double value = inst.lambda() * y;
    for (const auto& q : inst.queues()) {
        const double l = q.mu * inner_offered_load(q.m, q.n, y, inst.lambda() / q.mu);
        value += queue_loss_rate(q, l) - l * y;
    }
    return value;
}

SplitSolution solve_obs(const SystemInstance& inst, const SplitTolerances& tol) {
    if (!(tol.y > 0) || !(tol.lambda_rel > 0)) {
        throw DomainError("solve_obs: tolerances must be positive");
    }
    const double lambda = inst.lambda();
    const std::size_t K = inst.size();
    SplitSolution sol;
    sol.lambdas.assign(K, 0.0);
    sol.offered_loads.assign(K, 0.0);

    if (K == 1) {
        sol.lambdas[0] = lambda;
        sol.offered_loads[0] = lambda / inst.queue(0).mu;
        sol.multiplier = queue_loss_derivative(inst.queue(0), lambda);
    } else {
        double lo = 0;
        double hi = std::numeric_limits<double>::infinity();
        double widest = 0;
        for (const auto& q : inst.queues()) {
            const double d = queue_loss_derivative(q, lambda);
            hi = std::min(hi, d);
            widest = std::max(widest, d);
        }
        if (total_allocation(inst, hi, nullptr) < lambda) {
            sol.bracket_widened = true;
            hi = widest;
            if (total_allocation(inst, hi, nullptr) < lambda) {
                throw SolverError("solve_obs: failed to bracket the dual root");
            }
        }

        const double lambda_tol = tol.lambda_rel * lambda;
        while (true) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double excess = total_allocation(inst, mid, nullptr) - lambda;
            if (excess < 0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo <= tol.y && std::abs(excess) <= lambda_tol) break;
        }
        sol.multiplier = 0.5 * (lo + hi);
        const double total = total_allocation(inst, sol.multiplier, &sol.offered_loads);
        for (std::size_t k = 0; k < K; ++k) sol.lambdas[k] = sol.offered_loads[k] * inst.queue(k).mu;
        if (std::abs(total - lambda) > lambda_tol) {
            throw SolverError("solve_obs: split rates sum to " + std::to_string(total) +
                              " instead of " + std::to_string(lambda));
        }
    }

    sol.per_queue_loss.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& q = inst.queue(k);
        sol.per_queue_loss[k] = queue_loss_rate(q, sol.lambdas[k]);
        sol.total_loss_rate += sol.per_queue_loss[k];
        sol.kkt_residual = std::max(
            sol.kkt_residual, std::abs(queue_loss_derivative(q, sol.lambdas[k]) - sol.multiplier));
    }
    return sol;
}

double obs_loss_probability(const SystemInstance& inst, const SplitSolution& split) {
    return split.total_loss_rate / inst.lambda();
}

} // namespace lossroute
