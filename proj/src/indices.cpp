#include "lossroute/indices.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "lossroute/erlang.hpp"
#include "lossroute/errors.hpp"

namespace lossroute {

namespace {

IndexTable make_table(const QueueParams& q, std::size_t queue_id) {
    return {queue_id, std::vector<double>(static_cast<std::size_t>(q.n))};
}

void check_rate(double lambda, const char* fn) {
    if (!std::isfinite(lambda) || lambda <= 0) {
        throw DomainError(std::string(fn) + ": arrival rate must be finite and positive");
    }
}

} // namespace

std::string_view family_name(Family f) {
    switch (f) {
    case Family::SQ: return "SQ";
    case Family::SED: return "SED";
    case Family::NQ: return "NQ";
    case Family::FAS: return "FAS";
    case Family::RB: return "RB";
    case Family::PI: return "PI";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (Family f : kAllFamilies) {
        if (family_name(f) == upper) return f;
    }
    return std::nullopt;
}

IndexTable sq_index(const QueueParams& q, std::size_t queue_id) {
    auto t = make_table(q, queue_id);
    for (int x = 0; x < q.n; ++x) t.values[x] = x;
    return t;
}

IndexTable sed_index(const QueueParams& q, std::size_t queue_id) {
    auto t = make_table(q, queue_id);
    for (int x = 0; x < q.n; ++x) {
        t.values[x] = x < q.m ? 1.0 / q.mu : (x + 1.0) / (q.m * q.mu);
    }
    return t;
}

IndexTable fas_index(const QueueParams& q, std::size_t queue_id) {
    auto t = make_table(q, queue_id);
    std::fill(t.values.begin(), t.values.end(), 1.0 / q.mu);
    return t;
}

double nq_constant(const SystemInstance& inst) {
    double c = 0;
    for (const auto& q : inst.queues()) c = std::max(c, 1.0 / q.mu);
    return c;
}

IndexTable nq_index(const QueueParams& q, double c, std::size_t queue_id) {
    if (!(c >= 1.0 / q.mu)) {
        throw DomainError("nq_index: waiting offset " + std::to_string(c) +
                          " is below the service time 1/mu = " + std::to_string(1.0 / q.mu));
    }
    auto t = make_table(q, queue_id);
    for (int x = 0; x < q.n; ++x) {
        t.values[x] = x < q.m ? 1.0 / q.mu : c + (x + 1.0 - q.m) / (q.m * q.mu);
    }
    return t;
}

std::vector<RbRecursionState> rb_recursion_trace(const QueueParams& q, double lambda) {
    check_rate(lambda, "rb_index_recursive");
    const auto mubar = [&](int x) { return q.departure_rate(x); };
    const auto dmubar = [&](int x) { return mubar(x) - mubar(x - 1); };
    const auto load = [&](int x) { return lambda / mubar(x + 1); };

    std::vector<RbRecursionState> trace;
    trace.reserve(static_cast<std::size_t>(q.n));
    trace.push_back({1.0 / q.mu, 1.0, lambda * q.mu / (lambda + q.mu)});
    for (int x = 1; x < q.n; ++x) {
        const auto& prev = trace.back();
        const double step = dmubar(x + 1);
        const double carried = prev.w / load(x - 1);
        const double theta = prev.theta + (1.0 - prev.theta * step) / (step + carried);
        const double y = 1.0 - lambda * mubar(x) / prev.y /
                                   ((lambda + mubar(x)) * (lambda + mubar(x + 1)));
        const double w = lambda * (step + carried) / (y * (lambda + mubar(x + 1)));
        trace.push_back({theta, y, w});
    }
    return trace;
}

IndexTable rb_index_recursive(const QueueParams& q, double lambda, std::size_t queue_id) {
    auto t = make_table(q, queue_id);
    const auto trace = rb_recursion_trace(q, lambda);
    for (std::size_t x = 0; x < trace.size(); ++x) t.values[x] = trace[x].theta;
    return t;
}

namespace detail {

double rb_closed_general(const QueueParams& q, double lambda, int x) {
    const double r = lambda / q.mu;
    const double rho = r / q.m;
    const double cap = q.m * q.mu;
    const double c = erlang_c(q.m, r);
    // (rho^k - 1) / (rho - 1) kept as one factor: splitting it leaves two
    // terms of order (rho - 1)^-2 that cancel.
    const int k = x - q.m + 1;
    const double log_rho = std::log1p(rho - 1.0);
    const double geometric = std::expm1(k * log_rho) / (rho - 1.0);
    return (rho * c * geometric - (x + 1.0 - r)) / (cap * (rho - 1.0));
}

double rb_closed_unit_load(const QueueParams& q, int x) {
    const double dc = erlang_c_derivative_at_m(q.m);
    const double j = x - q.m;
    return (0.5 * (j + 2.0 + 2.0 * q.m * dc) * (j + 1.0) + q.m) / (q.m * q.mu);
}

} // namespace detail

IndexTable rb_index_closed(const QueueParams& q, double lambda, std::size_t queue_id) {
    check_rate(lambda, "rb_index_closed");
    auto t = make_table(q, queue_id);
    const double rho = lambda / (q.m * q.mu);
    const bool unit = detail::near_unit_load(rho);
    for (int x = 0; x < q.n; ++x) {
        if (x < q.m) {
            t.values[x] = 1.0 / q.mu;
        } else {
            t.values[x] = unit ? detail::rb_closed_unit_load(q, x)
                               : detail::rb_closed_general(q, lambda, x);
        }
    }
    return t;
}

IndexTable rb_index_ratio_oracle(const QueueParams& q, double lambda, std::size_t queue_id) {
    check_rate(lambda, "rb_index_ratio_oracle");
    auto t = make_table(q, queue_id);
    const long double lam = lambda;
    const long double r = lam / static_cast<long double>(q.mu);
    const long double rho = r / q.m;
    constexpr long double kRescaleAbove = 1e300L;

    // Unnormalized birth-death weights w_j of the station truncated at x.
    // With S = sum_{j<=x} w_j and A = sum_{j<=x} (x+1-j) w_j:
    //   L_{x+1} - L_x = w_{x+1} A / (S (S + w_{x+1}))
    //   B_x - B_{x+1} = w_x D / (S (S + w_{x+1})),  D = S (1 - g) + w_x g,
    // where g = w_{x+1}/w_x. The ratio then needs no differences of nearly
    // equal probabilities. For x >= m and rho > 1, D telescopes to
    // w_m - (rho - 1) sum_{j<m} w_j.
    long double w = 1, sum = 1, spread = 1;
    long double w_m = q.m == 0 ? 1 : 0, below_m = 0;
    for (int x = 0; x < q.n; ++x) {
        const long double g = r / std::min(x + 1, q.m);
        long double d;
        if (g <= 1 || x < q.m) {
            d = sum * (1 - g) + w * g;
        } else {
            d = w_m - (rho - 1) * below_m;
        }
        if (!(d > 0)) {
            throw NumericalError("rb_index_ratio_oracle: blocking does not decrease from buffer " +
                                 std::to_string(x) + " to " + std::to_string(x + 1));
        }
        t.values[x] = static_cast<double>(g * spread / (lam * d));

        if (x + 1 == q.m) below_m = sum;
        w *= g;
        if (x + 1 == q.m) w_m = w;
        sum += w;
        spread += sum;
        if (w > kRescaleAbove) {
            w /= kRescaleAbove;
            sum /= kRescaleAbove;
            spread /= kRescaleAbove;
            w_m /= kRescaleAbove;
            below_m /= kRescaleAbove;
        }
    }
    return t;
}

IndexTable pi_index(const QueueParams& q, double lambda_star, double phi_star,
                    std::size_t queue_id) {
    check_rate(lambda_star, "pi_index");
    auto t = make_table(q, queue_id);
    t.values[0] = phi_star / lambda_star;
    for (int x = 1; x < q.n; ++x) {
        t.values[x] = (phi_star + q.departure_rate(x) * t.values[x - 1]) / lambda_star;
    }
    return t;
}

IndexTable pi_index_at_load(const QueueParams& q, double offered_load, std::size_t queue_id) {
    check_rate(offered_load, "pi_index_at_load");
    auto t = make_table(q, queue_id);
    const double b = blocking_mmn(q.m, q.n, offered_load);
    const double lost = offered_load * b;
    t.values[0] = b;
    for (int x = 1; x < q.n; ++x) {
        t.values[x] = (lost + std::min(x, q.m) * t.values[x - 1]) / offered_load;
    }
    return t;
}

IndexTable pi_index_closed(const QueueParams& q, double lambda_star, std::size_t queue_id) {
    check_rate(lambda_star, "pi_index_closed");
    auto t = make_table(q, queue_id);
    const double r = lambda_star / q.mu;
    const double rho = r / q.m;
    const double full = blocking_mmn(q.m, q.n, r);
    const double bm = erlang_b(q.m, r);
    const bool unit = detail::near_unit_load(rho);
    for (int x = 0; x < q.n; ++x) {
        if (x <= q.m) {
            t.values[x] = full / erlang_b(x, r);
        } else if (unit) {
            t.values[x] = full * (x - q.m + 1.0 / bm);
        } else {
            const double p = std::pow(rho, x - q.m);
            t.values[x] = full * (1.0 - rho + rho * (1.0 - p) * bm) / (p * (1.0 - rho) * bm);
        }
    }
    return t;
}

std::vector<IndexTable> build_index_tables(const SystemInstance& inst, Family family,
                                           std::span<const double> split_loads) {
    if (family == Family::PI && split_loads.size() != inst.size()) {
        throw ValidationError("PI index needs one split offered load per queue (solve the split first)");
    }
    const double c = family == Family::NQ ? nq_constant(inst) : 0.0;
    std::vector<IndexTable> tables;
    tables.reserve(inst.size());
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const auto& q = inst.queue(k);
        switch (family) {
        case Family::SQ: tables.push_back(sq_index(q, k)); break;
        case Family::SED: tables.push_back(sed_index(q, k)); break;
        case Family::NQ: tables.push_back(nq_index(q, c, k)); break;
        case Family::FAS: tables.push_back(fas_index(q, k)); break;
        case Family::RB: tables.push_back(rb_index_recursive(q, inst.lambda(), k)); break;
        case Family::PI: tables.push_back(pi_index_at_load(q, split_loads[k], k)); break;
        }
    }
    return tables;
}

std::optional<std::size_t> route(const SystemInstance& inst, std::span<const IndexTable> tables,
                                 std::span<const int> state) {
    std::optional<std::size_t> best;
    double best_value = 0;
    for (std::size_t k = 0; k < inst.size(); ++k) {
        const auto& q = inst.queue(k);
        if (state[k] >= q.n) continue;
        const double v = tables[k].values[static_cast<std::size_t>(state[k])];
        if (!best) {
            best = k;
            best_value = v;
            continue;
        }
        const bool tied = std::abs(v - best_value) <= kTieTolerance;
        if ((!tied && v < best_value) ||
            (tied && q.capacity() > inst.queue(*best).capacity())) {
            best = k;
            best_value = v;
        }
    }
    return best;
}

} // namespace lossroute
