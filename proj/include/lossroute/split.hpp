#pragma once

// Optimal Bernoulli splitting of the arrival stream over the queues,
// found by bisection on the Lagrangian dual with per-queue inner root finds.
//
// A Bernoulli split may route to a full queue; its loss is evaluated with the
// queues decoupled, each an M/M/m_k/n_k queue fed at rate lambda_k. This
// assumes (unproven) that an optimal policy in that wider class never routes
// to a full queue when another has room.

#include <vector>

#include "lossroute/instance.hpp"

namespace lossroute {

struct SplitSolution {
    std::vector<double> lambdas;         ///< lambda_k*
    std::vector<double> offered_loads;   ///< r_k* = lambda_k* / mu_k, as solved
    double multiplier = 0;               ///< y*, the common marginal loss rate
    double total_loss_rate = 0;          ///< J = sum_k phi_k(lambda_k*)
    std::vector<double> per_queue_loss;  ///< phi_k(lambda_k*)
    double kkt_residual = 0;             ///< max_k |phi'_k(lambda_k*) - y*|
    bool bracket_widened = false;        ///< outer bracket had to grow past min_k phi'_k(lambda)
};

struct SplitTolerances {
    double y = 1e-12;            ///< absolute, on the multiplier
    double lambda_rel = 1e-10;   ///< on |sum_k lambda_k - lambda|, relative to lambda
};

/// phi(lambda_k) = lambda_k B_{m,n}(lambda_k / mu); zero at lambda_k = 0.
double queue_loss_rate(const QueueParams& q, double lam_k);

/// phi'(lambda_k) = B + r B' at r = lambda_k / mu; zero at lambda_k = 0.
double queue_loss_derivative(const QueueParams& q, double lam_k);

/// Minimizer over [0, lambda] of phi(l) - y l: 0 for y <= 0, lambda once
/// y >= phi'(lambda), otherwise the root of phi'(l) = y found by bisection
/// to absolute tolerance tol.
double inner_allocation(const QueueParams& q, double y, double lambda, double tol);

/// Offered load r in [0, load_cap] minimizing phi(r mu) - y r mu, found in
/// units of mu so that the result depends on (m, n, y) alone whenever it is
/// interior. Bisection runs until the bracket stops shrinking.
double inner_offered_load(int m, int n, double y, double load_cap);

/// Lagrangian dual function L(y) = lambda y + sum_k min_l [phi_k(l) - l y].
double split_dual_value(const SystemInstance& inst, double y);

SplitSolution solve_obs(const SystemInstance& inst, const SplitTolerances& tol = {});

/// Fraction of arrivals lost under the split: J / lambda.
double obs_loss_probability(const SystemInstance& inst, const SplitSolution& split);

} // namespace lossroute
