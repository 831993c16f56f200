#pragma once

#include <vector>

#include "poem/estimator.hpp"
#include "poem/grid.hpp"
#include "poem/schemes.hpp"

namespace poem::midas {

/// Difference between two approximate solutions, e = phi_hi - phi_lo, sampled
/// where both levels define phi (plus interpolated objective locations).
/// Positions are exact domain coordinates in [0,1)^dims.
struct DiffPoint {
    grid::UnitCoord pos;
    double value = 0.0;
    bool interpolated = false;
};

struct DiffField {
    int level_hi = 2;  // window-local level of the finer field
    int level_lo = 1;
    std::vector<DiffPoint> points;  // sorted by position
};

/// Pointwise phi_hi - phi_lo at every pair-shared location of the domain.
/// pair_map must describe the two-level unit of {lo, hi}; both fields must
/// come from the same ladder.
DiffField differences(const schemes::FieldLevel& hi, const schemes::FieldLevel& lo,
                      const grid::SharedPointMap& pair_map);

/// Linear (1D, 2 neighbors) or bilinear (2D, 4 rectangle corners) stencil with
/// exact rational weights summing to 1. Affine functions interpolate exactly.
struct InterpStencil {
    grid::UnitCoord objective;
    std::vector<grid::UnitCoord> neighbors;
    std::vector<Fraction> weights;
};

InterpStencil interp_weights(const grid::UnitCoord& objective,
                             const std::vector<grid::UnitCoord>& neighbors);

/// Extends a difference field to the stencils' objective locations, one unit
/// at a time across the periodic domain.
DiffField interpolate_differences(const DiffField& direct, const grid::UnitSignature& unit,
                                  const std::vector<InterpStencil>& stencils);

/// Solves the reduced system expressing consecutive-level differences through
/// the coefficient terms: row j is [(r^{p_m} - 1) r^{(j-1) p_m}] for
/// j = 1..k, right-hand side e_{j+1,j}. phi_ref is phi at the point on
/// window-local level ref_level; the estimated exact solution subtracts the
/// terms rescaled to that level.
estimator::ExpansionFit fit_from_differences(const Eigen::VectorXd& e,
                                             const std::vector<double>& orders, double r,
                                             double phi_ref, int ref_level);

/// One fitted location of a window's estimation support.
struct PointFit {
    double x = 0.0, y = 0.0;  // physical coordinates in [0,1)
    grid::Provenance provenance = grid::Provenance::AllShared;
    unsigned level_mask = 0;  // window-local levels defining phi here
    int ref_level = 1;        // window-local level supplying phi for the subtraction
    double phi_ref = 0.0;
    estimator::ExpansionFit fit;
};

struct WindowFits {
    int window = 0;  // 0-based; the window spans ladder levels window+1 .. window+k+1
    double h = 0.0;  // spacing of the window's coarsest level
    grid::SharedPointMap map;
    std::vector<PointFit> points;
};

/// Fits the expansion over one window of k+1 consecutive levels: direct
/// principal-system solves at all-level-shared points and, when
/// include_objective is set, reduced difference-system solves at objective
/// locations (differences interpolated where not directly defined).
WindowFits fit_window(const grid::GridLadder& ladder,
                      const std::vector<schemes::FieldLevel>& fields,
                      const estimator::PresetOrders& orders, int window, bool include_objective);

/// All windows of the ladder with the densified (shared + objective) support.
std::vector<WindowFits> run_midas(const grid::GridLadder& ladder,
                                  const std::vector<schemes::FieldLevel>& fields,
                                  const estimator::PresetOrders& orders);

}  // namespace poem::midas
