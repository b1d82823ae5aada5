#pragma once

// Nominal-load sweeps: every policy, the optimum and the bounds per load
// level, plus the percent-deviation / improvement metrics and CSV emission.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossroute/exact_mdp.hpp"
#include "lossroute/indices.hpp"
#include "lossroute/instance.hpp"
#include "lossroute/split.hpp"

namespace lossroute {

inline constexpr std::size_t kFamilyCount = std::size(kAllFamilies);

struct SweepRow {
    std::string tag;
    double rho = 0;
    double lambda = 0;
    std::optional<double> z_op;
    std::array<std::optional<double>, kFamilyCount> z_policy{};  ///< indexed by Family
    std::optional<double> z_obs;
    std::optional<double> lb_lbr;
    std::optional<double> lb_lbp;
    /// max over evaluated policies of |throughput + loss_rate - lambda| / lambda
    double conservation_defect = 0;
    double wall_time = 0;   ///< seconds for the whole row
    std::string error;      ///< empty when the row succeeded

    std::optional<double> z(Family f) const { return z_policy[static_cast<std::size_t>(f)]; }
    bool failed() const noexcept { return !error.empty(); }
};

struct SweepOptions {
    SolverOptions solver;
    SplitTolerances split;
    std::string tag;
};

/// 100 (z - z_op) / z_op; nullopt when z_op is zero.
std::optional<double> percent_deviation(double z, double z_op);

/// 100 (z_other - z_rb) / z_other; nullopt when z_other is zero.
std::optional<double> percent_improvement(double z_rb, double z_other);

/// rho_from, rho_from + step, ... up to rho_to inclusive (rounded to 1e-12).
std::vector<double> rho_grid(double rho_from, double rho_to, double rho_step);

/// One row per grid point in grid order. Solver and capacity failures are
/// recorded in the row's error field instead of aborting the sweep. An empty
/// family set yields no rows.
std::vector<SweepRow> run_sweep(const SystemInstance& base, std::span<const double> rhos,
                                std::span<const Family> families, const SweepOptions& opts = {});

/// Dominance of the optimum and validity of the bounds, to 1e-9. Returns a
/// description of the first violation, if any.
std::optional<std::string> check_row_invariants(const SweepRow& row);

std::string sweep_csv_header();
std::string sweep_csv_line(const SweepRow& row);

/// Writes rows as CSV (appending without a second header when `append` is
/// set and the file already has content) and a plain-text summary to
/// `summary`. Invariants are re-checked; violations land in the error column.
void emit_report(std::span<const SweepRow> rows, const std::filesystem::path& csv_path,
                 bool append, std::ostream& summary);

} // namespace lossroute
