#pragma once

// Loss-system special functions for M/M/m and M/M/m/n stations.
//
// Every function is a template on the floating type so that the ratio
// oracle in routing_indices can re-run the same kernels in extended
// precision. All quantities are functions of the offered load r = lambda/mu;
// the per-server load is rho = r/m.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "lossroute/errors.hpp"

namespace lossroute {

/// |rho - 1| below this selects the rho == 1 branch of the closed forms.
inline constexpr double kUnitLoadTolerance = 1e-8;

/// Probabilities are clamped into [0, 1] only when they overshoot by less than this.
inline constexpr double kProbabilitySlack = 1e-12;

template <std::floating_point Real>
struct LossCurvePoint {
    Real offered_load;
    Real blocking;
    Real blocking_derivative;
};

namespace detail {

template <std::floating_point Real>
void check_offered_load(Real r, const char* fn) {
    if (!std::isfinite(r) || !(r > Real(0))) {
        throw DomainError(std::string(fn) + ": offered load must be finite and positive, got " +
                          std::to_string(static_cast<double>(r)));
    }
}

inline void check_servers(int m, int min_m, const char* fn) {
    if (m < min_m) {
        throw DomainError(std::string(fn) + ": server count " + std::to_string(m) +
                          " below minimum " + std::to_string(min_m));
    }
}

inline void check_buffer(int m, int n, const char* fn) {
    check_servers(m, 1, fn);
    if (n < m) {
        throw DomainError(std::string(fn) + ": buffer " + std::to_string(n) +
                          " smaller than server count " + std::to_string(m));
    }
}

template <std::floating_point Real>
Real clamp_probability(Real p, const char* fn) {
    if (p >= Real(0) && p <= Real(1)) return p;
    if (p < Real(0) && p >= -Real(kProbabilitySlack)) return Real(0);
    if (p > Real(1) && p <= Real(1) + Real(kProbabilitySlack)) return Real(1);
    throw NumericalError(std::string(fn) + ": probability out of range: " +
                         std::to_string(static_cast<double>(p)));
}

template <std::floating_point Real>
bool near_unit_load(Real rho) {
    using std::abs;
    return abs(rho - Real(1)) < Real(kUnitLoadTolerance);
}

} // namespace detail

/// Erlang-B blocking probability B_m(r) of the M/M/m/m loss system.
template <std::floating_point Real>
Real erlang_b(int m, Real r) {
    detail::check_servers(m, 0, "erlang_b");
    detail::check_offered_load(r, "erlang_b");
    Real b = 1;
    for (int j = 1; j <= m; ++j) b = r * b / (Real(j) + r * b);
    return detail::clamp_probability(b, "erlang_b");
}

/// dB_m/dr = (m - r + r B_m) B_m / r.
template <std::floating_point Real>
Real erlang_b_derivative(int m, Real r) {
    detail::check_servers(m, 1, "erlang_b_derivative");
    const Real b = erlang_b(m, r);
    return (Real(m) - r + r * b) / r * b;
}

/// Erlang-C through the identity C_m = m B_m / (m - r + r B_m).
///
/// For r < m this is the M/M/m delay probability. The identity stays finite
/// for r >= m (the denominator equals m - L with L the carried load of the
/// loss system, which is below m), where the value exceeds one.
template <std::floating_point Real>
Real erlang_c(int m, Real r) {
    detail::check_servers(m, 1, "erlang_c");
    const Real b = erlang_b(m, r);
    return Real(m) * b / (Real(m) - r + r * b);
}

/// C'_m(m) = (1 - B_m(m)) / (m B_m(m)).
template <std::floating_point Real = double>
Real erlang_c_derivative_at_m(int m) {
    detail::check_servers(m, 1, "erlang_c_derivative_at_m");
    const Real b = erlang_b(m, Real(m));
    return (Real(1) - b) / (Real(m) * b);
}

/// Blocking probability B_{m,n}(r) of the M/M/m/n queue (n counts jobs in
/// service plus waiting). O(n): seeded with B_m(r) and then extended one
/// waiting position at a time.
template <std::floating_point Real>
Real blocking_mmn(int m, int n, Real r) {
    detail::check_buffer(m, n, "blocking_mmn");
    Real b = erlang_b(m, r);
    const Real servers = Real(m);
    for (int j = m + 1; j <= n; ++j) b = r * b / (servers + r * b);
    return detail::clamp_probability(b, "blocking_mmn");
}

/// dB_{m,n}/dr from the two-branch closed form.
template <std::floating_point Real>
Real blocking_mmn_derivative(int m, int n, Real r) {
    detail::check_buffer(m, n, "blocking_mmn_derivative");
    detail::check_offered_load(r, "blocking_mmn_derivative");
    const int k = n - m;
    if (k == 0) return erlang_b_derivative(m, r);

    const Real rho = r / Real(m);
    const Real b = blocking_mmn(m, n, r);
    if (detail::near_unit_load(rho)) {
        const Real kk = Real(k);
        const Real quad = Real(1 + m + n) - (Real(1) + kk) * (Real(1) + kk);
        return (kk + quad * b / Real(2)) * b / Real(m);
    }

    // g_times_b = b * (1 - rho^k) / ((1 - rho) rho^k), rearranged so that rho^k
    // never appears in a denominator (it under/overflows for long buffers).
    // 1 - rho^k goes through expm1/log1p: near rho = 1 the plain difference
    // cancels, and the error is then divided by (1 - rho) once more below.
    using std::expm1;
    using std::log1p;
    using std::exp;
    const Real bm = erlang_b(m, r);
    const Real log_rho = log1p(rho - Real(1));
    Real g_times_b;
    if (rho < Real(1)) {
        const Real one_minus_p = -expm1(Real(k) * log_rho);   // 1 - rho^k
        g_times_b = one_minus_p * bm / ((Real(1) - rho) + rho * one_minus_p * bm);
    } else {
        const Real q = exp(-Real(k) * log_rho);                // rho^-k
        const Real q_minus_one = expm1(-Real(k) * log_rho);
        g_times_b = q_minus_one * bm / ((Real(1) - rho) * q + rho * q_minus_one * bm);
    }
    const Real nr = Real(n) - r;
    return (nr / rho + (nr * b - g_times_b) / (Real(1) - rho)) * b / Real(m);
}

/// Normalized steady-state distribution of the M/M/m/n birth-death chain
/// (birth rate r, death rate min(x, m) in units of mu). n < m is allowed and
/// gives the M/M/n/n loss system.
template <std::floating_point Real>
std::vector<Real> mmn_distribution(int m, int n, Real r) {
    detail::check_servers(m, 1, "mmn_distribution");
    detail::check_offered_load(r, "mmn_distribution");
    if (n < 0) throw DomainError("mmn_distribution: negative buffer");
    constexpr Real kRescaleAbove = Real(1e200);
    std::vector<Real> w(static_cast<std::size_t>(n) + 1);
    w[0] = 1;
    for (int x = 1; x <= n; ++x) {
        w[x] = w[x - 1] * r / Real(x < m ? x : m);
        if (w[x] > kRescaleAbove) {
            for (int j = 0; j <= x; ++j) w[j] /= kRescaleAbove;
        }
    }
    Real total = 0;
    for (Real v : w) total += v;
    for (Real& v : w) v /= total;
    return w;
}

/// Mean number in system L_{m,n}(r). O(n) with running renormalization so
/// that r^n / m^n never overflows.
template <std::floating_point Real>
Real mean_number_mmn(int m, int n, Real r) {
    detail::check_buffer(m, n, "mean_number_mmn");
    detail::check_offered_load(r, "mean_number_mmn");
    constexpr Real kRescaleAbove = Real(1e200);
    Real weight = 1;
    Real mass = 1;
    Real moment = 0;
    for (int x = 1; x <= n; ++x) {
        weight *= r / Real(x < m ? x : m);
        mass += weight;
        moment += Real(x) * weight;
        if (weight > kRescaleAbove) {
            weight /= kRescaleAbove;
            mass /= kRescaleAbove;
            moment /= kRescaleAbove;
        }
    }
    return moment / mass;
}

template <std::floating_point Real>
LossCurvePoint<Real> loss_curve_point(int m, int n, Real r) {
    return {r, blocking_mmn(m, n, r), blocking_mmn_derivative(m, n, r)};
}

} // namespace lossroute
