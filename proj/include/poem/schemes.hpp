#pragma once

#include <Eigen/Core>
#include <functional>

#include "poem/grid.hpp"

namespace poem::schemes {

enum class ProblemKind { Advect1d, AdvDiff1d, Advect2d };
enum class Scheme { BeamWarming, Rk2Upwind2 };

/// Periodic test problem on [0,1]^dims with a fixed initial condition:
/// 2 + cos(2*pi*x) in 1D, 2 + cos(2*pi*(x+y)) in 2D.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::Advect1d;
    double a = 0.0;    // advection speed along x (> 0, upwind stencils)
    double a_y = 0.0;  // advection speed along y (2D)
    double nu = 0.0;   // diffusivity (advection-diffusion only)
    double t_end = 0.0;

    int dims() const { return kind == ProblemKind::Advect2d ? 2 : 1; }
    bool has_exact_solution() const { return true; }
};

/// Analytic solution of the test problem (all three kinds are translating
/// cosine profiles; the advection-diffusion case is manufactured by a source).
double exact_solution(const ProblemSpec& problem, double x, double y, double t);

/// Forcing that makes the translating cosine exact for advection-diffusion:
/// S(x,t) = 4*pi^2*nu*cos(2*pi*(x - a*t)). Identically zero when nu = 0.
double source_term(const ProblemSpec& problem, double x, double t);

double initial_condition(const ProblemSpec& problem, double x, double y);

/// Approximate solution on one ladder level at t_end. Periodic storage: the
/// point at coordinate 1 is identified with 0, so a 1D level holds `segments`
/// samples and a 2D level holds segments^2 (index iy*segments + ix).
struct FieldLevel {
    int level = 1;  // 1-based ladder level
    int dims = 1;
    long long segments = 0;
    double dx = 0.0;
    double dt = 0.0;
    long long steps = 0;
    Eigen::ArrayXd values;

    double at(long long ix, long long iy = 0) const { return values[iy * segments + ix]; }
};

struct SolverOptions {
    double cfl_limit = 0.5;  // per-dimension gate for Rk2Upwind2
    // Test hook replacing the problem's fixed initial condition.
    std::function<double(double, double)> ic_override;
};

/// Runs `scheme` on one level of the ladder for exactly t_end/dt steps.
/// Bitwise deterministic for fixed inputs. Throws UnstableParameters when the
/// CFL gate is violated (BeamWarming: 0 < c <= 2; Rk2Upwind2: c <= cfl_limit).
FieldLevel solve(Scheme scheme, const ProblemSpec& problem, const grid::GridLadder& ladder,
                 int level, const SolverOptions& options = {});

}  // namespace poem::schemes
