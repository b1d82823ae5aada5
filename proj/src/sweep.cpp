#include "lossroute/sweep.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "lossroute/errors.hpp"

namespace lossroute {

namespace {

constexpr double kDominanceSlack = 1e-9;

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string format_number(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    return os.str();
}

std::string format_percent(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v << '%';
    return os.str();
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::optional<double> deviation(const std::optional<double>& z, const std::optional<double>& z_op) {
    if (!z || !z_op) return std::nullopt;
    return percent_deviation(*z, *z_op);
}

std::optional<double> improvement(const std::optional<double>& z_rb,
                                  const std::optional<double>& z_other) {
    if (!z_rb || !z_other) return std::nullopt;
    return percent_improvement(*z_rb, *z_other);
}

} // namespace

std::optional<double> percent_deviation(double z, double z_op) {
    if (z_op == 0) return std::nullopt;
    return 100.0 * (z - z_op) / z_op;
}

std::optional<double> percent_improvement(double z_rb, double z_other) {
    if (z_other == 0) return std::nullopt;
    return 100.0 * (z_other - z_rb) / z_other;
}

std::vector<double> rho_grid(double rho_from, double rho_to, double rho_step) {
    if (!(rho_from > 0) || !(rho_to >= rho_from) || !(rho_step > 0)) {
        throw ValidationError("rho grid: need 0 < from <= to and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((rho_to - rho_from) / rho_step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid.push_back(std::round((rho_from + static_cast<double>(i) * rho_step) * 1e12) / 1e12);
    }
    return grid;
}

std::vector<SweepRow> run_sweep(const SystemInstance& base, std::span<const double> rhos,
                                std::span<const Family> families, const SweepOptions& opts) {
    std::vector<SweepRow> rows;
    if (families.empty()) return rows;
    for (double rho : rhos) {
        SweepRow row;
        row.tag = opts.tag;
        row.rho = rho;
        const auto start = std::chrono::steady_clock::now();
        try {
            const SystemInstance inst = scale_to_nominal_load(base, rho);
            row.lambda = inst.lambda();
            const SplitSolution split = solve_obs(inst, opts.split);
            row.z_obs = obs_loss_probability(inst, split);
            row.lb_lbr = bound_lbr(inst);
            row.lb_lbp = bound_lbp(inst);
            row.z_op = optimal_loss(inst, opts.solver).z_op;
            for (Family f : families) {
                const auto ev = evaluate_index_policy(inst, f, &split, opts.solver);
                row.z_policy[static_cast<std::size_t>(f)] = ev.loss_probability;
                row.conservation_defect =
                    std::max(row.conservation_defect,
                             std::abs(ev.throughput + ev.loss_rate - inst.lambda()) / inst.lambda());
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<std::string> check_row_invariants(const SweepRow& row) {
    if (row.failed() || !row.z_op) return std::nullopt;
    const double z_op = *row.z_op;
    for (Family f : kAllFamilies) {
        const auto z = row.z(f);
        if (z && z_op > *z + kDominanceSlack) {
            return "optimum exceeds " + std::string(family_name(f)) + " loss";
        }
    }
    if (row.z_obs && z_op > *row.z_obs + kDominanceSlack) return "optimum exceeds OBS loss";
    if (row.lb_lbr && *row.lb_lbr > z_op + kDominanceSlack) return "LBR bound exceeds optimum";
    if (row.lb_lbp && *row.lb_lbp > z_op + kDominanceSlack) return "LBP bound exceeds optimum";
    return std::nullopt;
}

std::string sweep_csv_header() {
    std::ostringstream os;
    os << "tag,rho,lambda,z_op";
    for (Family f : kAllFamilies) os << ",z_" << lower(family_name(f));
    os << ",z_obs,lb_lbr,lb_lbp";
    for (Family f : kAllFamilies) os << ",dev_" << lower(family_name(f));
    os << ",dev_obs,dev_lbr,dev_lbp";
    for (Family f : kAllFamilies) {
        if (f != Family::RB) os << ",imp_rb_vs_" << lower(family_name(f));
    }
    os << ",imp_rb_vs_obs,wall_time_s,error";
    return os.str();
}

std::string sweep_csv_line(const SweepRow& row) {
    std::ostringstream os;
    os << quote(row.tag) << ',' << format_number(row.rho) << ',' << format_number(row.lambda) << ','
       << format_number(row.z_op);
    for (Family f : kAllFamilies) os << ',' << format_number(row.z(f));
    os << ',' << format_number(row.z_obs) << ',' << format_number(row.lb_lbr) << ','
       << format_number(row.lb_lbp);
    for (Family f : kAllFamilies) os << ',' << format_number(deviation(row.z(f), row.z_op));
    os << ',' << format_number(deviation(row.z_obs, row.z_op)) << ','
       << format_number(deviation(row.lb_lbr, row.z_op)) << ','
       << format_number(deviation(row.lb_lbp, row.z_op));
    const auto z_rb = row.z(Family::RB);
    for (Family f : kAllFamilies) {
        if (f != Family::RB) os << ',' << format_number(improvement(z_rb, row.z(f)));
    }
    os << ',' << format_number(improvement(z_rb, row.z_obs));
    os << ',' << std::fixed << std::setprecision(3) << row.wall_time;
    std::string error = row.error;
    if (error.empty()) {
        if (auto violation = check_row_invariants(row)) error = "invariant violation: " + *violation;
    }
    os << ',' << quote(error);
    return os.str();
}

void emit_report(std::span<const SweepRow> rows, const std::filesystem::path& csv_path, bool append,
                 std::ostream& summary) {
    const bool has_content = append && std::filesystem::exists(csv_path) &&
                             std::filesystem::file_size(csv_path) > 0;
    std::ofstream out(csv_path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw Error(csv_path.string() + ": cannot open for writing");
    if (!has_content) out << sweep_csv_header() << '\n';
    for (const auto& row : rows) out << sweep_csv_line(row) << '\n';
    out.flush();
    if (!out) throw Error(csv_path.string() + ": write failed");

    if (rows.empty()) {
        summary << "warning: no rows to report (empty family set?)\n";
        return;
    }
    summary << std::fixed;
    for (const auto& row : rows) {
        summary << (row.tag.empty() ? "" : row.tag + " ") << "rho=" << std::setprecision(3) << row.rho;
        if (row.failed()) {
            summary << "  FAILED: " << row.error << '\n';
            continue;
        }
        summary << std::scientific << std::setprecision(6) << "  z_op=" << row.z_op.value_or(NAN);
        std::optional<Family> best;
        for (Family f : kAllFamilies) {
            const auto z = row.z(f);
            if (z && (!best || *z < *row.z(*best))) best = f;
        }
        summary << std::fixed << std::setprecision(3);
        if (best) {
            const auto dev = deviation(row.z(*best), row.z_op);
            summary << "  best=" << family_name(*best) << " (" << format_percent(dev) << ")";
        }
        if (row.z(Family::RB)) {
            const auto gap = deviation(row.z(Family::RB), row.z_op);
            summary << "  RB gap=" << format_percent(gap);
        }
        if (auto violation = check_row_invariants(row)) summary << "  VIOLATION: " << *violation;
        summary << '\n';
    }
    summary << std::defaultfloat;
}

} // namespace lossroute
