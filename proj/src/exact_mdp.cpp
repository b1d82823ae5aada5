#include "lossroute/exact_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lossroute/erlang.hpp"
#include "lossroute/errors.hpp"

namespace lossroute {

namespace {

void check_capacity(const SystemInstance& inst, const SolverOptions& opts) {
    const auto count = joint_state_count(inst);
    if (count > opts.max_states) {
        throw CapacityError("joint state space has " + std::to_string(count) +
                            " states, above the limit of " + std::to_string(opts.max_states));
    }
}

double inf_norm(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Probability vectors from the solvers may carry rounding-level negatives.
void clean_distribution(std::vector<double>& pi) {
    for (double& p : pi) {
        if (p < 0) {
            if (p < -kProbabilitySlack) {
                throw NumericalError("steady-state solve produced probability " + std::to_string(p));
            }
            p = 0;
        }
    }
    double total = 0;
    for (double p : pi) total += p;
    if (!(total > 0)) throw NumericalError("steady-state solve produced a zero distribution");
    for (double& p : pi) p /= total;
}

std::vector<double> steady_state_direct(const ChainModel& model, const StationaryPolicy& policy) {
    const auto& space = model.space;
    const auto n = static_cast<Eigen::Index>(space.size());
    // Rows of Q^T: balance equation of state y. Row 0 is replaced by normalization.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(space.size() * (2 * space.queues() + 2));
    for (std::size_t x = 0; x < space.size(); ++x) {
        const auto occ = space.occupancy(x);
        double out = 0;
        if (policy[x] >= 0) {
            const std::size_t y = x + space.stride(static_cast<std::size_t>(policy[x]));
            if (y != 0) entries.emplace_back(y, x, model.lambda);
            out += model.lambda;
        }
        for (std::size_t k = 0; k < occ.size(); ++k) {
            if (occ[k] > 0) {
                const double rate = model.departure[k][occ[k]];
                const std::size_t y = x - space.stride(k);
                if (y != 0) entries.emplace_back(y, x, rate);
                out += rate;
            }
        }
        if (x != 0) entries.emplace_back(x, x, -out);
        entries.emplace_back(0, x, 1.0);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw SolverError("steady-state factorization failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[0] = 1.0;
    Eigen::VectorXd sol = lu.solve(rhs);
    // One step of iterative refinement.
    const Eigen::VectorXd residual = rhs - a * sol;
    sol += lu.solve(residual);
    if (lu.info() != Eigen::Success) throw SolverError("steady-state solve failed");
    return {sol.data(), sol.data() + n};
}

std::vector<double> steady_state_power(const ChainModel& model, const StationaryPolicy& policy,
                                       const SolverOptions& opts) {
    const std::size_t n = model.space.size();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> flow(n);
    const double scale = 1.0 / model.uniformization;
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        balance_flow(opts.backend, model, policy, pi, flow);
        if (inf_norm(flow) * scale <= opts.power_tol) return pi;
        for (std::size_t i = 0; i < n; ++i) pi[i] += flow[i] * scale;
    }
    throw SolverError("power iteration did not reach the balance tolerance in " +
                      std::to_string(opts.max_iterations) + " sweeps");
}

} // namespace

OptimalSolution optimal_loss(const SystemInstance& inst, const SolverOptions& opts) {
    if (!(opts.tol > 0)) throw DomainError("optimal_loss: tolerance must be positive");
    check_capacity(inst, opts);
    const ChainModel model(inst);
    const std::size_t n = model.space.size();
    const double step = 1.0 / model.uniformization;

    OptimalSolution sol;
    sol.relative_values.assign(n, 0.0);
    sol.policy.assign(n, kBlocked);
    std::vector<double> rhs(n);
    auto& h = sol.relative_values;

    double best_span = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        const SweepBounds b = bellman_sweep(opts.backend, model, h, rhs, sol.policy);
        const double span = b.span();
        if (!std::isfinite(span)) throw SolverError("relative value iteration produced non-finite values");
        best_span = std::min(best_span, span);
        if (span <= opts.tol) {
            sol.z_op = 0.5 * (b.min + b.max);
            sol.residual_span = span;
            sol.iterations = it;
            return sol;
        }
        if (it > 1000 && span > 1e6 * best_span + 1.0) {
            throw SolverError("relative value iteration diverging: span " + std::to_string(span));
        }
        const double anchor = rhs[0];
        for (std::size_t s = 0; s < n; ++s) h[s] += (rhs[s] - anchor) * step;
    }
    throw SolverError("relative value iteration did not converge in " +
                      std::to_string(opts.max_iterations) + " sweeps (best span " +
                      std::to_string(best_span) + ")");
}

double bellman_residual(const SystemInstance& inst, double z, const std::vector<double>& h) {
    const ChainModel model(inst);
    if (h.size() != model.space.size()) throw ValidationError("relative values have the wrong size");
    std::vector<double> rhs(h.size());
    std::vector<int> action(h.size());
    bellman_sweep_serial(model, h, rhs, action);
    double worst = 0;
    for (double v : rhs) worst = std::max(worst, std::abs(z - v));
    return worst;
}

void validate_policy(const SystemInstance& inst, const StationaryPolicy& policy) {
    const StateSpace space(inst);
    if (policy.size() != space.size()) {
        throw ValidationError("policy covers " + std::to_string(policy.size()) + " states, expected " +
                              std::to_string(space.size()));
    }
    for (std::size_t s = 0; s < space.size(); ++s) {
        const int a = policy[s];
        if (s == space.full_state()) {
            if (a != kBlocked) throw ValidationError("policy must block in the full state");
            continue;
        }
        if (a < 0 || a >= static_cast<int>(space.queues())) {
            throw ValidationError("policy blocks or names an unknown queue in nonfull state " +
                                  std::to_string(s));
        }
        if (space.occupancy(s)[static_cast<std::size_t>(a)] >= space.buffer(static_cast<std::size_t>(a))) {
            throw ValidationError("policy routes to full queue " + std::to_string(a) + " in state " +
                                  std::to_string(s));
        }
    }
}

PolicyEvaluation evaluate_policy(const SystemInstance& inst, const StationaryPolicy& policy,
                                 const SolverOptions& opts) {
    check_capacity(inst, opts);
    validate_policy(inst, policy);
    const ChainModel model(inst);
    const std::size_t n = model.space.size();

    const bool direct = opts.steady_state == SteadyStateMethod::Direct ||
                        (opts.steady_state == SteadyStateMethod::Auto && n <= opts.direct_limit);
    PolicyEvaluation ev;
    ev.steady_state = direct ? steady_state_direct(model, policy) : steady_state_power(model, policy, opts);
    clean_distribution(ev.steady_state);

    std::vector<double> flow(n);
    balance_flow(opts.backend, model, policy, ev.steady_state, flow);
    ev.balance_residual = inf_norm(flow);

    const auto& pi = ev.steady_state;
    ev.loss_probability = pi[model.space.full_state()];
    ev.loss_rate = inst.lambda() * ev.loss_probability;
    for (std::size_t s = 0; s < n; ++s) {
        const auto occ = model.space.occupancy(s);
        double served = 0;
        for (std::size_t k = 0; k < occ.size(); ++k) served += model.departure[k][occ[k]];
        ev.throughput += pi[s] * served;
    }
    return ev;
}

StationaryPolicy index_policy(const SystemInstance& inst, std::span<const IndexTable> tables) {
    if (tables.size() != inst.size()) throw ValidationError("one index table per queue is required");
    const StateSpace space(inst);
    StationaryPolicy policy(space.size(), kBlocked);
    for (std::size_t s = 0; s < space.size(); ++s) {
        const auto choice = route(inst, tables, space.occupancy(s));
        policy[s] = choice ? static_cast<int>(*choice) : kBlocked;
    }
    return policy;
}

PolicyEvaluation evaluate_index_policy(const SystemInstance& inst, Family family,
                                       const SplitSolution* split, const SolverOptions& opts) {
    check_capacity(inst, opts);
    std::vector<IndexTable> tables;
    if (family == Family::PI) {
        if (split) {
            tables = build_index_tables(inst, family, split->offered_loads);
        } else {
            const auto solved = solve_obs(inst);
            tables = build_index_tables(inst, family, solved.offered_loads);
        }
    } else {
        tables = build_index_tables(inst, family);
    }
    return evaluate_policy(inst, index_policy(inst, tables), opts);
}

double bound_lbr(const SystemInstance& inst) {
    double total = 0;
    for (const auto& q : inst.queues()) total += blocking_mmn(q.m, q.n, inst.lambda() / q.mu);
    return std::max(0.0, total - static_cast<double>(inst.size() - 1));
}

double bound_lbp(const SystemInstance& inst) {
    return blocking_mmn(1, inst.total_buffer(), inst.lambda() / inst.total_capacity());
}

void write_policy_csv(std::ostream& out, const SystemInstance& inst, const StationaryPolicy& policy) {
    const StateSpace space(inst);
    out << "state_id";
    for (std::size_t k = 0; k < space.queues(); ++k) out << ",x_" << (k + 1);
    out << ",queue\n";
    for (std::size_t s = 0; s < space.size(); ++s) {
        out << s;
        for (int x : space.occupancy(s)) out << ',' << x;
        out << ',' << policy.at(s) << '\n';
    }
}

void write_steady_state_csv(std::ostream& out, const PolicyEvaluation& eval) {
    out << "state_id,probability\n";
    const auto old = out.precision(17);
    for (std::size_t s = 0; s < eval.steady_state.size(); ++s) {
        out << s << ',' << eval.steady_state[s] << '\n';
    }
    out.precision(old);
}

} // namespace lossroute
