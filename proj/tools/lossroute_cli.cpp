// lossroute: routing indices, Bernoulli splits, exact evaluation and
// load sweeps for Poisson traffic routed to parallel M/M/m/n queues.
//
// Exit codes: 0 success, 2 validation error, 3 solver error, 4 capacity error.
// LOSSROUTE_THREADS sets the OpenMP thread count for the state-space kernels.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lossroute/errors.hpp"
#include "lossroute/exact_mdp.hpp"
#include "lossroute/indices.hpp"
#include "lossroute/instance.hpp"
#include "lossroute/kernels.hpp"
#include "lossroute/split.hpp"
#include "lossroute/sweep.hpp"

namespace {

using namespace lossroute;

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCapacity = 4;

Family require_family(const std::string& name) {
    if (auto f = parse_family(name)) return *f;
    throw ValidationError("unknown index family '" + name + "' (expected SQ, SED, NQ, FAS, RB or PI)");
}

std::vector<Family> parse_family_list(const std::string& list) {
    std::vector<Family> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "none") continue;
        if (item == "all" || item == "ALL") return {std::begin(kAllFamilies), std::end(kAllFamilies)};
        out.push_back(require_family(item));
    }
    return out;
}

void write_file(const std::string& path, const auto& writer) {
    std::ofstream out(path);
    if (!out) throw Error(path + ": cannot open for writing");
    writer(out);
}

void apply_thread_env() {
    if (const char* env = std::getenv("LOSSROUTE_THREADS")) {
        try {
            set_kernel_threads(std::stoi(env));
        } catch (const std::exception&) {
            throw ValidationError(std::string("LOSSROUTE_THREADS: not an integer: ") + env);
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum-loss routing to parallel finite-buffer multiserver queues"};
    app.require_subcommand(1);

    std::string instance_path;
    std::string family_name_arg = "RB";
    std::string policy_out, steady_out;
    double tol = 1e-10;

    auto* indices = app.add_subcommand("indices", "Dump one family's index tables as CSV (queue_id,x,theta)");
    indices->add_option("instance", instance_path, "Instance file")->required();
    indices->add_option("--family", family_name_arg, "SQ, SED, NQ, FAS, RB or PI")->required();

    auto* obs = app.add_subcommand("obs", "Solve the optimal Bernoulli split");
    obs->add_option("instance", instance_path, "Instance file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Exact loss of an index policy");
    evaluate->add_option("instance", instance_path, "Instance file")->required();
    evaluate->add_option("--family", family_name_arg, "SQ, SED, NQ, FAS, RB or PI")->required();
    evaluate->add_option("--policy-out", policy_out, "Write the policy as CSV");
    evaluate->add_option("--steady-out", steady_out, "Write the steady-state distribution as CSV");

    auto* optimal = app.add_subcommand("optimal", "Minimum loss probability by relative value iteration");
    optimal->add_option("instance", instance_path, "Instance file")->required();
    optimal->add_option("--tol", tol, "Stopping span of the Bellman right-hand side");
    optimal->add_option("--policy-out", policy_out, "Write the optimal policy as CSV");

    auto* bounds = app.add_subcommand("bounds", "Relaxation and pooling lower bounds on the minimum loss");
    bounds->add_option("instance", instance_path, "Instance file")->required();

    double rho_from = 0.70, rho_to = 1.20, rho_step = 0.05;
    std::string families_arg = "all";
    std::string out_path = "sweep.csv";
    std::string tag;
    std::string summary_path;
    bool append = false;
    auto* sweep = app.add_subcommand("sweep", "Sweep the nominal load and tabulate every policy");
    sweep->add_option("instance", instance_path, "Base instance file")->required();
    sweep->add_option("--rho-from", rho_from, "First nominal load");
    sweep->add_option("--rho-to", rho_to, "Last nominal load");
    sweep->add_option("--rho-step", rho_step, "Nominal load step");
    sweep->add_option("--families", families_arg, "Comma-separated families, 'all' or 'none'");
    sweep->add_option("--out", out_path, "CSV output path");
    sweep->add_option("--tag", tag, "Value of the tag column");
    sweep->add_flag("--append", append, "Append to an existing CSV");
    sweep->add_option("--summary", summary_path, "Write the text summary here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    std::cout << std::setprecision(17);
    try {
        apply_thread_env();
        const SystemInstance inst = load_instance(instance_path);

        if (*indices) {
            const Family f = require_family(family_name_arg);
            std::vector<double> loads;
            if (f == Family::PI) loads = solve_obs(inst).offered_loads;
            std::cout << "queue_id,x,theta\n";
            for (const auto& t : build_index_tables(inst, f, loads)) {
                for (std::size_t x = 0; x < t.values.size(); ++x) {
                    std::cout << t.queue_id << ',' << x << ',' << t.values[x] << '\n';
                }
            }
        } else if (*obs) {
            const auto split = solve_obs(inst);
            std::cout << "# y_star=" << split.multiplier << " J_bs=" << split.total_loss_rate << '\n';
            std::cout << "queue_id,lambda_star,p_star,phi_star\n";
            for (std::size_t k = 0; k < inst.size(); ++k) {
                std::cout << k << ',' << split.lambdas[k] << ',' << split.lambdas[k] / inst.lambda()
                          << ',' << split.per_queue_loss[k] << '\n';
            }
        } else if (*evaluate) {
            const Family f = require_family(family_name_arg);
            std::vector<double> loads;
            if (f == Family::PI) loads = solve_obs(inst).offered_loads;
            const auto tables = build_index_tables(inst, f, loads);
            const auto policy = index_policy(inst, tables);
            const auto ev = evaluate_policy(inst, policy);
            std::cout << "family," << family_name(f) << '\n'
                      << "loss_probability," << ev.loss_probability << '\n'
                      << "loss_rate," << ev.loss_rate << '\n'
                      << "throughput," << ev.throughput << '\n';
            if (!policy_out.empty()) {
                write_file(policy_out, [&](std::ostream& o) { write_policy_csv(o, inst, policy); });
            }
            if (!steady_out.empty()) {
                write_file(steady_out, [&](std::ostream& o) { write_steady_state_csv(o, ev); });
            }
        } else if (*optimal) {
            SolverOptions opts;
            opts.tol = tol;
            const auto sol = optimal_loss(inst, opts);
            std::cout << "z_op," << sol.z_op << '\n'
                      << "loss_rate," << sol.z_op * inst.lambda() << '\n'
                      << "residual_span," << sol.residual_span << '\n'
                      << "iterations," << sol.iterations << '\n';
            if (!policy_out.empty()) {
                write_file(policy_out, [&](std::ostream& o) { write_policy_csv(o, inst, sol.policy); });
            }
        } else if (*bounds) {
            std::cout << "lb_lbr," << bound_lbr(inst) << '\n' << "lb_lbp," << bound_lbp(inst) << '\n';
        } else if (*sweep) {
            const auto families = parse_family_list(families_arg);
            const auto grid = rho_grid(rho_from, rho_to, rho_step);
            SweepOptions opts;
            opts.tag = tag;
            if (families.empty()) std::cerr << "warning: empty family set, writing header only\n";
            const auto rows = run_sweep(inst, grid, families, opts);
            if (summary_path.empty()) {
                emit_report(rows, out_path, append, std::cout);
            } else {
                std::ofstream summary(summary_path);
                if (!summary) throw Error(summary_path + ": cannot open for writing");
                emit_report(rows, out_path, append, summary);
            }
            for (const auto& row : rows) {
                if (row.failed()) {
                    std::cerr << "row rho=" << row.rho << " failed: " << row.error << '\n';
                }
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
