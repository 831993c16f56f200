#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "poem/estimator.hpp"
#include "poem/grid.hpp"
#include "poem/midas.hpp"
#include "poem/schemes.hpp"

namespace poem::study {

/// One ladder description inside a study.
struct GridCase {
    Fraction ratio;
    long long segments = 0;  // coarsest level, per dimension
    Fraction dt;             // coarsest time step
    int levels = 3;
};

/// single: one ladder, one report.
/// two-tier: each case is a 3-level ladder refined `tiers` times globally by
///   1/2; every tier contributes one window (shared vs objective norms).
/// ratio-comparison: each case is a full ladder run with MIDAS; curves are
///   compared across refinement ratios.
enum class Protocol { Single, TwoTier, RatioComparison };

struct StudyConfig {
    schemes::ProblemKind problem = schemes::ProblemKind::Advect1d;
    schemes::Scheme scheme = schemes::Scheme::Rk2Upwind2;
    double a = 0.0, a_y = 0.0, nu = 0.0;
    Fraction t_end;
    grid::RefinementPath refinement = grid::RefinementPath::ConstantCfl;
    Protocol protocol = Protocol::Single;
    std::vector<GridCase> cases;  // exactly one for Protocol::Single
    int tiers = 1;                // TwoTier only
    estimator::PresetOrders orders;
    double beta = 0.01;
    bool midas = false;
    double cfl_limit = 0.5;
    std::string out_dir = "out";
    std::string name = "study";

    schemes::ProblemSpec problem_spec() const;
};

/// Parses the key-value study description. Unknown keys, missing keys, and
/// malformed values are reported with the file name and line number.
StudyConfig parse_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<bool> midas;
    std::optional<double> beta;
    std::optional<int> levels;
};

void apply_overrides(StudyConfig& config, const Overrides& overrides);

/// Work units of a ladder: sum over levels of grid points times time steps.
long long work_units(const grid::GridLadder& ladder);

struct CaseResult {
    GridCase grid_case;
    int tier = 0;  // two-tier stage (0-based)
    estimator::ConvergenceReport report;
    long long work = 0;
};

struct StudyResult {
    std::vector<CaseResult> cases;
    estimator::OrderIteration iteration;  // order-check trail of the primary case
    long long total_work = 0;
};

StudyResult run_study(const StudyConfig& config);

/// Runs the study and writes the .dat tables, summary.txt, and report.json
/// under config.out_dir. Returns the result for further inspection.
StudyResult run_study_with_outputs(const StudyConfig& config);

// ---------------------------------------------------------------------------
// Figure-ready tables: two comment header lines (column names, provenance),
// then whitespace-separated rows at 17 significant digits.

struct DataTable {
    std::vector<std::string> columns;
    std::string provenance;
    std::vector<std::vector<double>> rows;
};

void emit_dat(const DataTable& table, const std::filesystem::path& path);
DataTable parse_dat(const std::filesystem::path& path);

struct CostComparison {
    long long work_a = 0;
    long long work_b = 0;
    double ratio = 0.0;  // work_a / work_b
};

/// Work-unit comparison of two study configurations (nothing is solved).
CostComparison cost_model(const StudyConfig& a, const StudyConfig& b);

}  // namespace poem::study
