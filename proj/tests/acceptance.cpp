// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.
//
//   acceptance <instances-dir>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "lossroute/erlang.hpp"
#include "lossroute/exact_mdp.hpp"
#include "lossroute/indices.hpp"
#include "lossroute/split.hpp"
#include "lossroute/sweep.hpp"
#include "oracles.hpp"

using namespace lossroute;

namespace {

struct Outcome {
    bool pass = true;
    int violations = 0;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (++violations <= 8) detail << "violation: " << what << "; ";
    }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << "exception: " << e.what() << "; ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        out.pass = false;
        out.detail << "over time budget " << budget_s << " s; ";
    }
    if (out.violations > 8) out.detail << out.violations - 8 << " more violations; ";
    std::printf("[%s] %d. %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", id, title, secs,
                out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
}

std::filesystem::path instance_dir;
SystemInstance experiment(int e) {
    return load_instance(instance_dir / ("experiment" + std::to_string(e) + ".json"));
}

const std::vector<double> kGrid = rho_grid(0.70, 1.20, 0.05);

std::map<int, std::vector<SweepRow>> sweeps;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    instance_dir = argc > 1 ? argv[1] : "instances";

    criterion(1, "RB index: recursion, closed form and ratio oracle agree", 1.0, [](Outcome& out) {
        double worst = 0;
        for (int e : {1, 2, 3}) {
            const auto base = experiment(e);
            for (double rho : kGrid) {
                const auto inst = scale_to_nominal_load(base, rho);
                for (std::size_t k = 0; k < inst.size(); ++k) {
                    const auto a = rb_index_recursive(inst.queue(k), inst.lambda());
                    const auto b = rb_index_closed(inst.queue(k), inst.lambda());
                    const auto c = rb_index_ratio_oracle(inst.queue(k), inst.lambda());
                    for (std::size_t x = 0; x < a.values.size(); ++x) {
                        worst = std::max({worst, oracle::rel_err(a.values[x], b.values[x]),
                                          oracle::rel_err(a.values[x], c.values[x]),
                                          oracle::rel_err(b.values[x], c.values[x])});
                    }
                }
            }
        }
        out.detail << "max rel diff " << fmt(worst);
        out.require(worst <= 1e-8, "relative disagreement above 1e-8");
    });

    criterion(2, "Blocking and its derivative match birth-death sums and finite differences", 30.0,
              [](Outcome& out) {
        double worst_b = 0, worst_fd = 0, worst_id = 0;
        for (int m = 1; m <= 40; ++m) {
            for (int n = m; n <= 60; ++n) {
                for (double rho : {0.05, 0.3, 0.7, 0.95, 1.0, 1.05, 1.5, 3.0, 8.0}) {
                    const double r = rho * m;
                    const double b = blocking_mmn(m, n, r);
                    worst_b = std::max(worst_b, oracle::rel_err(b, double(oracle::blocking(m, n, r))));
                    const double d = blocking_mmn_derivative(m, n, r);
                    const double h = 1e-5 * r;
                    const double fd = oracle::central_difference(
                        [&](double s) { return double(oracle::blocking(m, n, s)); }, r, h);
                    worst_fd = std::max(worst_fd, oracle::rel_err(d, fd));
                    worst_id = std::max(worst_id,
                                        oracle::rel_err(d, double(oracle::blocking_derivative(m, n, r))));
                }
            }
        }
        out.detail << "blocking " << fmt(worst_b) << ", derivative vs central difference " << fmt(worst_fd)
                   << ", vs B(n-L)/r " << fmt(worst_id);
        out.require(worst_b <= 1e-6, "blocking");
        out.require(worst_fd <= 1e-6, "derivative vs finite difference");
        out.require(worst_id <= 1e-6, "derivative vs B(n-L)/r");
    });

    criterion(3, "Bernoulli split KKT certificate and symmetric closed form", 1.0, [](Outcome& out) {
        double worst_spread = 0, worst_sum = 0, worst_sym = 0;
        for (int e : {1, 2}) {
            const auto base = experiment(e);
            for (double rho : kGrid) {
                const auto inst = scale_to_nominal_load(base, rho);
                const auto s = solve_obs(inst);
                double lo = 1e300, hi = -1e300, sum = 0;
                for (std::size_t k = 0; k < inst.size(); ++k) {
                    const double d = queue_loss_derivative(inst.queue(k), s.lambdas[k]);
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                    sum += s.lambdas[k];
                }
                worst_spread = std::max(worst_spread, hi - lo);
                worst_sum = std::max(worst_sum, std::abs(sum - inst.lambda()) / inst.lambda());
            }
        }
        oracle::InstanceGen gen(3003);
        for (int trial = 0; trial < 20; ++trial) {
            const int m = gen.integer(1, 8), n = m + gen.integer(0, 10);
            std::vector<QueueParams> qs;
            double total_mu = 0;
            for (int k = 0, kk = gen.integer(2, 5); k < kk; ++k) {
                qs.push_back({m, n, gen.uniform(0.2, 20)});
                total_mu += qs.back().mu;
            }
            const SystemInstance inst(m * total_mu * gen.uniform(0.5, 1.5), qs);
            const auto s = solve_obs(inst);
            for (std::size_t k = 0; k < qs.size(); ++k) {
                worst_sym = std::max(worst_sym,
                                     oracle::rel_err(s.lambdas[k], inst.lambda() * qs[k].mu / total_mu));
            }
        }
        out.detail << "marginal spread " << fmt(worst_spread) << ", sum defect/lambda " << fmt(worst_sum)
                   << ", symmetric rel err " << fmt(worst_sym);
        out.require(worst_spread <= 1e-6, "marginal loss rates differ");
        out.require(worst_sum <= 1e-10, "split does not sum to lambda");
        out.require(worst_sym <= 1e-8, "symmetric closed form");
    });

    criterion(4, "FAS optimal for single-slot queues, SQ optimal for equal-rate single servers", 60.0,
              [](Outcome& out) {
        oracle::InstanceGen gen(4004);
        double worst_fas = 0, worst_sq = 0;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<QueueParams> qs;
            for (int k = 0, kk = gen.integer(2, 5); k < kk; ++k) qs.push_back({1, 1, gen.uniform(0.2, 10)});
            double cap = 0;
            for (const auto& q : qs) cap += q.capacity();
            const SystemInstance inst(cap * gen.uniform(0.3, 2.0), qs);
            worst_fas = std::max(worst_fas, std::abs(evaluate_index_policy(inst, Family::FAS).loss_probability -
                                                     optimal_loss(inst).z_op));
        }
        for (int trial = 0; trial < 20; ++trial) {
            const double mu = gen.uniform(0.5, 5);
            std::vector<QueueParams> qs;
            const int kk = gen.integer(2, 4);
            for (int k = 0; k < kk; ++k) qs.push_back({1, gen.integer(1, 8), mu});
            if (qs[0].n == qs[1].n) qs[1].n = qs[0].n + 1;
            const SystemInstance inst(mu * kk * gen.uniform(0.3, 2.0), qs);
            worst_sq = std::max(worst_sq, std::abs(evaluate_index_policy(inst, Family::SQ).loss_probability -
                                                   optimal_loss(inst).z_op));
        }
        out.detail << "max |z_FAS - z_OP| " << fmt(worst_fas) << ", max |z_SQ - z_OP| " << fmt(worst_sq);
        out.require(worst_fas <= 1e-9, "FAS");
        out.require(worst_sq <= 1e-9, "SQ");
    });

    criterion(5, "PI collapses to SQ on equal-size queues", 60.0, [](Outcome& out) {
        oracle::InstanceGen gen(5005);
        int identical_tables = 0, equal_losses = 0;
        for (int trial = 0; trial < 10; ++trial) {
            const int m = gen.integer(1, 4), n = m + gen.integer(0, 5);
            std::vector<QueueParams> qs;
            double cap = 0;
            for (int k = 0, kk = gen.integer(2, 3); k < kk; ++k) {
                qs.push_back({m, n, gen.uniform(0.3, 6)});
                cap += qs.back().capacity();
            }
            const SystemInstance inst(cap * gen.uniform(0.5, 1.5), qs);
            const auto split = solve_obs(inst);
            const auto tables = build_index_tables(inst, Family::PI, split.offered_loads);
            bool same = true;
            for (const auto& t : tables) same = same && t.values == tables[0].values;
            identical_tables += same;
            const double z_pi = evaluate_index_policy(inst, Family::PI, &split).loss_probability;
            const double z_sq = evaluate_index_policy(inst, Family::SQ).loss_probability;
            equal_losses += z_pi == z_sq;
        }
        out.detail << identical_tables << "/10 identical tables, " << equal_losses << "/10 equal losses";
        out.require(identical_tables == 10, "PI tables differ across queues");
        out.require(equal_losses == 10, "z_PI != z_SQ");
    });

    criterion(6, "Hand-solved two-queue chain", 1.0, [](Outcome& out) {
        const SystemInstance inst(1, {{1, 1, 1}, {1, 1, 1}});
        const double z_fas = evaluate_index_policy(inst, Family::FAS).loss_probability;
        const double z_sq = evaluate_index_policy(inst, Family::SQ).loss_probability;
        const double z_op = optimal_loss(inst).z_op;
        out.detail << "z_nonidling " << z_fas << ", z_op " << z_op;
        out.require(std::abs(z_fas - 0.2) <= 1e-10, "nonidling policy");
        out.require(std::abs(z_sq - 0.2) <= 1e-10, "SQ policy");
        out.require(std::abs(z_op - 0.2) <= 1e-10, "optimum");
    });

    criterion(7, "Full sweeps: dominance, bound validity, conservation", 600.0, [](Outcome& out) {
        const std::size_t expected_states[] = {2431, 2717, 6859};
        for (int e : {1, 2, 3}) {
            const auto base = experiment(e);
            out.require(joint_state_count(base) == expected_states[e - 1], "state count");
            SweepOptions opts;
            opts.tag = "experiment" + std::to_string(e);
            sweeps[e] = run_sweep(base, kGrid, kAllFamilies, opts);
            double worst_cons = 0, worst_gap = -1e300;
            for (const auto& row : sweeps[e]) {
                out.require(!row.failed(), "row failed: " + row.error);
                if (row.failed()) continue;
                const auto violation = check_row_invariants(row);
                out.require(!violation, opts.tag + " rho " + fmt(row.rho) + ": " + violation.value_or(""));
                worst_cons = std::max(worst_cons, row.conservation_defect);
                worst_gap = std::max(worst_gap, std::max(*row.lb_lbr, *row.lb_lbp) - *row.z_op);
                out.require(row.conservation_defect <= 1e-8, "conservation");
            }
            out.detail << "exp" << e << " rows " << sweeps[e].size() << " conservation " << fmt(worst_cons)
                       << " max(bound - z_op) " << fmt(worst_gap) << "; ";
        }
    });

    criterion(8, "RB has the smallest deviation; deviations shrink past nominal load 1", 1.0,
              [](Outcome& out) {
        const Family compared[] = {Family::SQ, Family::SED, Family::NQ, Family::PI};
        for (int e : {1, 2}) {
            const auto& rows = sweeps.at(e);
            out.require(!rows.empty(), "sweep missing");
            for (const auto& row : rows) {
                if (row.failed()) continue;
                const double dev_rb = *percent_deviation(*row.z(Family::RB), *row.z_op);
                for (Family f : compared) {
                    const double dev = *percent_deviation(*row.z(f), *row.z_op);
                    out.require(dev_rb <= dev, "exp" + std::to_string(e) + " rho " + fmt(row.rho) + ": " +
                                                   std::string(family_name(f)) + " beats RB");
                }
            }
            for (Family f : {Family::SQ, Family::SED, Family::NQ, Family::PI, Family::RB}) {
                double previous = 1e300;
                for (const auto& row : rows) {
                    if (row.failed() || row.rho < 1.0) continue;
                    const double dev = *percent_deviation(*row.z(f), *row.z_op);
                    out.require(dev <= previous, "exp" + std::to_string(e) + " " + std::string(family_name(f)) +
                                                     " deviation grows at rho " + fmt(row.rho));
                    previous = dev;
                }
            }
            out.detail << "exp" << e << " RB deviation";
            for (const auto& row : rows) {
                if (!row.failed()) out.detail << ' ' << fmt(*percent_deviation(*row.z(Family::RB), *row.z_op));
            }
            out.detail << "; ";
        }
    });

    criterion(9, "Bound crossover", 1.0, [](Outcome& out) {
        for (const auto& row : sweeps.at(2)) {
            if (row.failed()) continue;
            out.require(*row.lb_lbp >= *row.lb_lbr, "exp2 rho " + fmt(row.rho) + ": LBR " +
                                                        fmt(*row.lb_lbr) + " above LBP " + fmt(*row.lb_lbp));
        }
        const auto& last = sweeps.at(1).back();
        out.require(!last.failed() && *last.lb_lbr > *last.lb_lbp, "exp1 at largest rho: LBR not above LBP");
        out.detail << "exp1 rho " << fmt(last.rho) << " LBR " << fmt(last.lb_lbr.value_or(NAN)) << " LBP "
                   << fmt(last.lb_lbp.value_or(NAN));
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
