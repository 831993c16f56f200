#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "poem/errors.hpp"

namespace poem::estimator {

/// User-chosen constant expansion orders p_1 < ... < p_k.
struct PresetOrders {
    std::vector<double> p;
    double order_quantum = 1.0;  // smallest admissible increment between candidate orders

    int k() const { return static_cast<int>(p.size()); }
    void validate() const;  // throws DegenerateOrders
};

/// Result of fitting the expansion at one point: the estimated exact solution
/// and the coefficient terms D_{p_m} h^{p_m}, scaled to the coarsest spacing
/// of the window they were fitted from.
struct ExpansionFit {
    double phi_e_hat = 0.0;
    Eigen::VectorXd terms;

    double error_estimate() const { return terms.sum(); }  // coarsest-level DE estimate
};

/// (k+1)x(k+1) principal system matrix: row l (0-based) is
/// [1, r^(l p_1), ..., r^(l p_k)]. Invertible for distinct orders, r in (0,1).
Eigen::MatrixXd build_system(const std::vector<double>& orders, double r);

/// Principal system factored once and reused across points of a window.
class ExpansionSolver {
public:
    ExpansionSolver(std::vector<double> orders, double r);

    /// values: phi at one location on k+1 successive levels, coarsest first.
    ExpansionFit fit(const Eigen::VectorXd& values) const;

    int k() const { return static_cast<int>(orders_.size()); }

private:
    std::vector<double> orders_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

ExpansionFit fit_expansion(const Eigen::VectorXd& values, const std::vector<double>& orders,
                           double r);

/// Pointwise estimated discretization error phi - phi_e_hat.
Eigen::ArrayXd estimate_error(const Eigen::ArrayXd& phi, const std::vector<ExpansionFit>& fits);

struct Norms {
    double l1 = 0.0;   // mean of |f|
    double l2 = 0.0;   // root mean square of |f|
    double linf = 0.0; // max of |f|
};

Norms norms(const Eigen::ArrayXd& field);  // throws EmptyField

/// Slopes between consecutive points of a log10-log10 series. h must be
/// strictly decreasing and values positive.
std::vector<double> log_slope(const std::vector<double>& h, const std::vector<double>& values);

struct BetaResult {
    double beta = 0.0;
    bool asymptotic = false;
};

/// Ratio of the second coefficient-term norm to the first; asymptotic when
/// it falls below the threshold. Throws ZeroLeadingTerm when undefined.
BetaResult beta_ratio(double first_term_l2, double second_term_l2, double threshold = 0.01);

struct TermVerdict {
    double preset = 0.0;
    double observed_slope = 0.0;
    bool matches = false;
};

struct OrderCheck {
    std::vector<TermVerdict> verdicts;
    bool all_match = false;
    double suggested_mu = 0.0;  // meaningful only when a term deviates
};

/// Compares each term's finest-window convergence slope against its preset
/// order. mu is the smallest deviating observed slope, rounded to the nearest
/// multiple of order_quantum.
OrderCheck check_orders(const std::vector<double>& h_per_window,
                        const std::vector<std::vector<double>>& term_l2_per_window,
                        const PresetOrders& orders, double tolerance = 0.1);

struct OrderIterationStep {
    std::vector<double> orders;
    OrderCheck check;
};

struct OrderIteration {
    std::vector<OrderIterationStep> trail;
    std::vector<double> final_orders;
    bool converged = false;
};

/// Re-runs the expansion fit with deviating orders replaced by mu until every
/// term converges at its preset rate or the iteration budget is exhausted.
/// evaluate returns per-window term L2 norms for a candidate order set.
OrderIteration iterate_orders(
    const std::function<std::vector<std::vector<double>>(const PresetOrders&)>& evaluate,
    const std::vector<double>& h_per_window, const PresetOrders& initial, int max_iterations = 5,
    double tolerance = 0.1);

struct GreResult {
    double observed_order = 0.0;
    double error_estimate = 0.0;
};

/// Generalized-Richardson baseline from three successive solutions. Throws
/// UndefinedOrder when the difference ratio is not positive.
GreResult gre_baseline(double phi1, double phi2, double phi3, double r);

// ---------------------------------------------------------------------------
// Per-study convergence report assembled by the study runner.

struct WindowReport {
    int coarse_level = 1;  // 1-based ladder level of the window's coarsest grid
    double h = 0.0;        // spacing of that level (dx, or dt in time-only mode)
    double log10_h = 0.0;
    long long support_shared = 0;
    long long support_objective = 0;

    std::vector<double> term_l2;            // combined support
    std::vector<double> term_l2_shared;     // all-level-shared support
    std::vector<double> term_l2_objective;  // objective support (empty without MIDAS)

    double beta = 0.0;
    bool beta_defined = true;
    bool asymptotic = false;

    Norms eps_tilde;                   // estimated DE at the coarse level, combined support
    std::optional<Norms> eps_full;     // actual DE over the full coarse level
    std::optional<Norms> eps_shared;   // actual DE restricted to the shared support
    std::optional<Norms> es_ex;        // phi_e_hat - phi_e over the combined support
};

struct ConvergenceReport {
    std::vector<WindowReport> windows;
    std::vector<std::vector<double>> term_slopes;  // [window-1][term], combined support
    OrderCheck order_check;

    std::vector<double> window_h() const;
    std::vector<std::vector<double>> term_l2_per_window() const;
};

}  // namespace poem::estimator
