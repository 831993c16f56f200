#include "poem/schemes.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace poem::schemes {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

inline long long wrap(long long i, long long n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

// phi^{n+1}_i = phi_i - (c/2)(3 phi_i - 4 phi_{i-1} + phi_{i-2})
//                     + (c^2/2)(phi_i - 2 phi_{i-1} + phi_{i-2}),  c = a dt/dx
void beam_warming_step(const double* p, double* out, long long n, double c) {
    for (long long i = 0; i < n; ++i) {
        const double pm1 = p[wrap(i - 1, n)];
        const double pm2 = p[wrap(i - 2, n)];
        out[i] = p[i] - 0.5 * c * (3.0 * p[i] - 4.0 * pm1 + pm2) +
                 0.5 * c * c * (p[i] - 2.0 * pm1 + pm2);
    }
}

// Second-order upwind advection, optional fourth-order-centered diffusion,
// optional manufactured source evaluated at time t.
void rhs_1d(const double* p, double* out, long long n, double dx, const ProblemSpec& problem,
            double t) {
    const double adv = -problem.a / (2.0 * dx);
    const double dif = problem.nu / (12.0 * dx * dx);
    const bool has_dif = problem.kind == ProblemKind::AdvDiff1d && problem.nu != 0.0;
    for (long long i = 0; i < n; ++i) {
        const double pm1 = p[wrap(i - 1, n)];
        const double pm2 = p[wrap(i - 2, n)];
        double v = adv * (3.0 * p[i] - 4.0 * pm1 + pm2);
        if (has_dif) {
            const double pp1 = p[wrap(i + 1, n)];
            const double pp2 = p[wrap(i + 2, n)];
            v += dif * (-pp2 + 16.0 * pp1 - 30.0 * p[i] + 16.0 * pm1 - pm2);
        }
        out[i] = v;
    }
    if (problem.kind == ProblemKind::AdvDiff1d && problem.nu != 0.0) {
        const double amp = 4.0 * std::numbers::pi * std::numbers::pi * problem.nu;
        for (long long i = 0; i < n; ++i) {
            const double x = static_cast<double>(i) * dx;
            out[i] += amp * std::cos(two_pi * (x - problem.a * t));
        }
    }
}

void rhs_2d(const double* p, double* out, long long n, double dx, const ProblemSpec& problem) {
    const double cx = -problem.a / (2.0 * dx);
    const double cy = -problem.a_y / (2.0 * dx);
    for (long long iy = 0; iy < n; ++iy) {
        const double* row = p + iy * n;
        const double* rm1 = p + wrap(iy - 1, n) * n;
        const double* rm2 = p + wrap(iy - 2, n) * n;
        double* o = out + iy * n;
        for (long long ix = 0; ix < n; ++ix) {
            const double pm1 = row[wrap(ix - 1, n)];
            const double pm2 = row[wrap(ix - 2, n)];
            o[ix] = cx * (3.0 * row[ix] - 4.0 * pm1 + pm2) +
                    cy * (3.0 * row[ix] - 4.0 * rm1[ix] + rm2[ix]);
        }
    }
}

}  // namespace

double exact_solution(const ProblemSpec& problem, double x, double y, double t) {
    switch (problem.kind) {
        case ProblemKind::Advect1d:
        case ProblemKind::AdvDiff1d: return 2.0 + std::cos(two_pi * (x - problem.a * t));
        case ProblemKind::Advect2d:
            return 2.0 + std::cos(two_pi * (x + y - (problem.a + problem.a_y) * t));
    }
    return 0.0;
}

double source_term(const ProblemSpec& problem, double x, double t) {
    if (problem.kind != ProblemKind::AdvDiff1d || problem.nu == 0.0) return 0.0;
    return 4.0 * std::numbers::pi * std::numbers::pi * problem.nu *
           std::cos(two_pi * (x - problem.a * t));
}

double initial_condition(const ProblemSpec& problem, double x, double y) {
    return exact_solution(problem, x, y, 0.0);
}

FieldLevel solve(Scheme scheme, const ProblemSpec& problem, const grid::GridLadder& ladder,
                 int level, const SolverOptions& options) {
    if (level < 1 || level > ladder.levels) throw ConfigError("level out of range");
    if (problem.dims() != ladder.dims) throw ConfigError("problem/ladder dimension mismatch");
    if (scheme == Scheme::BeamWarming && problem.kind != ProblemKind::Advect1d)
        throw ConfigError("the Beam-Warming solver supports pure 1D advection only");
    if (problem.kind == ProblemKind::AdvDiff1d && scheme != Scheme::Rk2Upwind2)
        throw ConfigError("advection-diffusion requires the Rk2Upwind2 scheme");
    if (problem.a <= 0.0 || (problem.dims() == 2 && problem.a_y <= 0.0))
        throw ConfigError("advection speeds must be positive");

    FieldLevel field;
    field.level = level;
    field.dims = ladder.dims;
    field.segments = ladder.segments[level - 1];
    field.dx = ladder.dx_at(level);
    field.dt = to_double(ladder.dt_at(level));
    field.steps = ladder.steps[level - 1];

    const long long n = field.segments;
    const double c = problem.a * field.dt / field.dx;
    if (scheme == Scheme::BeamWarming) {
        if (c <= 0.0 || c > 2.0)
            throw UnstableParameters("Beam-Warming needs 0 < a*dt/dx <= 2, got " +
                                     std::to_string(c));
    } else {
        const double limit = options.cfl_limit;
        double worst = c;
        if (ladder.dims == 2) worst = std::max(c, problem.a_y * field.dt / field.dx);
        if (worst > limit + 1e-12)
            throw UnstableParameters("Rk2Upwind2 CFL " + std::to_string(worst) +
                                     " exceeds the limit " + std::to_string(limit));
    }

    const long long total = ladder.dims == 2 ? n * n : n;
    field.values.resize(total);
    for (long long iy = 0; iy < (ladder.dims == 2 ? n : 1); ++iy)
        for (long long ix = 0; ix < n; ++ix) {
            const double x = static_cast<double>(ix) * field.dx;
            const double y = static_cast<double>(iy) * field.dx;
            field.values[iy * (ladder.dims == 2 ? n : 0) + ix] =
                options.ic_override ? options.ic_override(x, y) : initial_condition(problem, x, y);
        }

    Eigen::ArrayXd scratch(total);
    if (scheme == Scheme::BeamWarming) {
        for (long long s = 0; s < field.steps; ++s) {
            beam_warming_step(field.values.data(), scratch.data(), n, c);
            field.values.swap(scratch);
        }
        return field;
    }

    // Heun: k1 = L(phi, t_n); k2 = L(phi + dt k1, t_n + dt);
    // phi^{n+1} = phi + dt/2 (k1 + k2).
    Eigen::ArrayXd k1(total), k2(total);
    const double dt = field.dt;
    for (long long s = 0; s < field.steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        if (ladder.dims == 2) {
            rhs_2d(field.values.data(), k1.data(), n, field.dx, problem);
            scratch = field.values + dt * k1;
            rhs_2d(scratch.data(), k2.data(), n, field.dx, problem);
        } else {
            rhs_1d(field.values.data(), k1.data(), n, field.dx, problem, t);
            scratch = field.values + dt * k1;
            rhs_1d(scratch.data(), k2.data(), n, field.dx, problem, t + dt);
        }
        field.values += 0.5 * dt * (k1 + k2);
    }
    return field;
}

}  // namespace poem::schemes
