#include "poem/midas.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

namespace poem::midas {

using grid::UnitCoord;

namespace {

Fraction frac_mod1(const Fraction& v) {
    Fraction one(1);
    Fraction out = v;
    while (out >= one) out -= one;
    while (out < Fraction(0)) out += one;
    return out;
}

}  // namespace

DiffField differences(const schemes::FieldLevel& hi, const schemes::FieldLevel& lo,
                      const grid::SharedPointMap& pair_map) {
    if (hi.dims != lo.dims) throw MismatchedLadder("field dimensions differ");
    if (hi.segments <= lo.segments && !(hi.segments == lo.segments && hi.dt < lo.dt))
        throw MismatchedLadder("first field must be the finer level");
    if (pair_map.unit.levels() != 2) throw MismatchedLadder("pair map must describe two levels");
    const long long r = pair_map.unit.repeats;
    if (pair_map.unit.s_per_level[0] * r != lo.segments ||
        pair_map.unit.s_per_level[1] * r != hi.segments)
        throw MismatchedLadder("pair map does not match the fields' segment counts");

    DiffField out;
    out.level_hi = hi.level;
    out.level_lo = lo.level;
    const long long units_y = hi.dims == 2 ? r : 1;
    for (long long uy = 0; uy < units_y; ++uy)
        for (long long ux = 0; ux < r; ++ux)
            for (const grid::SupportPoint& p : pair_map.points) {
                const long long lx0 = ux * pair_map.unit.s_per_level[0] + p.unit_index[0][0];
                const long long ly0 = uy * pair_map.unit.s_per_level[0] + p.unit_index[0][1];
                const long long lx1 = ux * pair_map.unit.s_per_level[1] + p.unit_index[1][0];
                const long long ly1 = uy * pair_map.unit.s_per_level[1] + p.unit_index[1][1];
                DiffPoint d;
                d.pos.x = Fraction(ux) / r + p.pos.x / r;
                d.pos.y = hi.dims == 2 ? Fraction(uy) / r + p.pos.y / r : Fraction(0);
                d.value = hi.at(lx1, hi.dims == 2 ? ly1 : 0) - lo.at(lx0, lo.dims == 2 ? ly0 : 0);
                out.points.push_back(d);
            }
    std::sort(out.points.begin(), out.points.end(),
              [](const DiffPoint& a, const DiffPoint& b) { return a.pos < b.pos; });
    return out;
}

InterpStencil interp_weights(const UnitCoord& objective,
                             const std::vector<UnitCoord>& neighbors) {
    InterpStencil st;
    st.objective = objective;
    st.neighbors = neighbors;
    if (neighbors.size() == 2) {
        const Fraction xa = neighbors[0].x, xb = neighbors[1].x;
        const Fraction ya = neighbors[0].y, yb = neighbors[1].y;
        const bool along_y = xa == xb;
        const Fraction a = along_y ? ya : xa;
        const Fraction b = along_y ? yb : xb;
        const Fraction o = along_y ? objective.y : objective.x;
        if (along_y ? objective.x != xa : objective.y != ya)
            throw NonBracketing("neighbors must lie on a line through the objective");
        if (!(a < b) || o < a || o > b)
            throw NonBracketing("neighbors do not bracket the objective");
        st.weights = {(b - o) / (b - a), (o - a) / (b - a)};
        return st;
    }
    if (neighbors.size() == 4) {
        // Rectangle corners ordered (xa,ya), (xb,ya), (xa,yb), (xb,yb).
        const Fraction xa = neighbors[0].x, xb = neighbors[1].x;
        const Fraction ya = neighbors[0].y, yb = neighbors[2].y;
        if (neighbors[1].y != ya || neighbors[2].x != xa || neighbors[3].x != xb ||
            neighbors[3].y != yb)
            throw NonBracketing("neighbors must form an axis-aligned rectangle");
        if (!(xa < xb) || !(ya < yb) || objective.x < xa || objective.x > xb ||
            objective.y < ya || objective.y > yb)
            throw NonBracketing("rectangle does not contain the objective");
        const Fraction wx_b = (objective.x - xa) / (xb - xa);
        const Fraction wy_b = (objective.y - ya) / (yb - ya);
        const Fraction one(1);
        st.weights = {(one - wx_b) * (one - wy_b), wx_b * (one - wy_b), (one - wx_b) * wy_b,
                      wx_b * wy_b};
        return st;
    }
    throw NonBracketing("stencils carry 2 (line) or 4 (rectangle) neighbors");
}

DiffField interpolate_differences(const DiffField& direct, const grid::UnitSignature& unit,
                                  const std::vector<InterpStencil>& stencils) {
    std::map<UnitCoord, double> lookup;
    for (const DiffPoint& p : direct.points) lookup[p.pos] = p.value;

    DiffField out = direct;
    const long long r = unit.repeats;
    const long long units_y = unit.dims == 2 ? r : 1;
    for (long long uy = 0; uy < units_y; ++uy)
        for (long long ux = 0; ux < r; ++ux)
            for (const InterpStencil& st : stencils) {
                DiffPoint d;
                d.pos.x = frac_mod1(Fraction(ux) / r + st.objective.x / r);
                d.pos.y = unit.dims == 2 ? frac_mod1(Fraction(uy) / r + st.objective.y / r)
                                         : Fraction(0);
                d.interpolated = true;
                double v = 0.0;
                for (std::size_t i = 0; i < st.neighbors.size(); ++i) {
                    UnitCoord n;
                    n.x = frac_mod1(Fraction(ux) / r + st.neighbors[i].x / r);
                    n.y = unit.dims == 2 ? frac_mod1(Fraction(uy) / r + st.neighbors[i].y / r)
                                         : Fraction(0);
                    auto it = lookup.find(n);
                    if (it == lookup.end())
                        throw InsufficientNeighbors("difference value missing at a stencil neighbor");
                    v += to_double(st.weights[i]) * it->second;
                }
                d.value = v;
                out.points.push_back(d);
            }
    std::sort(out.points.begin(), out.points.end(),
              [](const DiffPoint& a, const DiffPoint& b) { return a.pos < b.pos; });
    return out;
}

namespace {

Eigen::MatrixXd difference_system(const std::vector<double>& orders, double r) {
    const int k = static_cast<int>(orders.size());
    Eigen::MatrixXd m(k, k);
    for (int j = 1; j <= k; ++j)
        for (int c = 0; c < k; ++c)
            m(j - 1, c) = (std::pow(r, orders[c]) - 1.0) * std::pow(r, (j - 1) * orders[c]);
    return m;
}

}  // namespace

estimator::ExpansionFit fit_from_differences(const Eigen::VectorXd& e,
                                             const std::vector<double>& orders, double r,
                                             double phi_ref, int ref_level) {
    estimator::PresetOrders check{orders, 1.0};
    check.validate();
    if (e.size() != static_cast<Eigen::Index>(orders.size()))
        throw MismatchedSupport("need one consecutive-level difference per order");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(difference_system(orders, r));
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0)
        throw SingularSystem("difference system is singular");

    estimator::ExpansionFit fit;
    fit.terms = lu.solve(e);
    double phi_e = phi_ref;
    for (std::size_t m = 0; m < orders.size(); ++m)
        phi_e -= fit.terms[static_cast<Eigen::Index>(m)] * std::pow(r, (ref_level - 1) * orders[m]);
    fit.phi_e_hat = phi_e;
    return fit;
}

namespace {

struct PairAccess {
    bool direct = false;
    // Neighbor coordinates in the closed unit [0,1]^d and their weights; a
    // direct access uses the point itself with weight 1.
    std::vector<UnitCoord> coords;
    std::vector<double> weights;
};

// Nearest bracketing coordinates of v on the lattice {t/g}; collapses to a
// single coordinate when v is on the lattice.
std::pair<Fraction, Fraction> bracket(const Fraction& v, long long g) {
    const long long num = v.numerator() * g;
    const long long den = v.denominator();
    const long long lo = num / den;  // v in [0,1], so num >= 0
    if (lo * den == num) return {Fraction(lo, g), Fraction(lo, g)};
    return {Fraction(lo, g), Fraction(lo + 1, g)};
}

PairAccess make_access(const grid::SupportPoint& p, const grid::UnitSignature& unit, int j) {
    // j is the 0-based window level of the pair's coarser member.
    PairAccess access;
    const unsigned need = (1u << j) | (1u << (j + 1));
    if ((p.level_mask & need) == need) {
        access.direct = true;
        access.coords = {p.pos};
        access.weights = {1.0};
        return access;
    }
    const long long g = std::gcd(unit.s_per_level[j], unit.s_per_level[j + 1]);
    auto [xa, xb] = bracket(p.pos.x, g);
    auto [ya, yb] = unit.dims == 2 ? bracket(p.pos.y, g)
                                   : std::pair<Fraction, Fraction>{Fraction(0), Fraction(0)};
    std::vector<std::pair<Fraction, double>> wx, wy;
    if (xa == xb) {
        wx = {{xa, 1.0}};
    } else {
        const double t = to_double((p.pos.x - xa) / (xb - xa));
        wx = {{xa, 1.0 - t}, {xb, t}};
    }
    if (ya == yb) {
        wy = {{ya, 1.0}};
    } else {
        const double t = to_double((p.pos.y - ya) / (yb - ya));
        wy = {{ya, 1.0 - t}, {yb, t}};
    }
    for (const auto& [y, wy_v] : wy)
        for (const auto& [x, wx_v] : wx) {
            access.coords.push_back({x, y});
            access.weights.push_back(wx_v * wy_v);
        }
    return access;
}

}  // namespace

WindowFits fit_window(const grid::GridLadder& ladder,
                      const std::vector<schemes::FieldLevel>& fields,
                      const estimator::PresetOrders& orders, int window, bool include_objective) {
    orders.validate();
    const int k = orders.k();
    if (static_cast<int>(fields.size()) != ladder.levels)
        throw MismatchedLadder("one field per ladder level is required");
    if (window < 0 || window + k + 1 > ladder.levels)
        throw MismatchedLadder("window does not fit the ladder");

    std::vector<long long> segs(ladder.segments.begin() + window,
                                ladder.segments.begin() + window + k + 1);
    const grid::UnitSignature unit = grid::irreducible_unit(segs, ladder.dims);
    const double r = to_double(ladder.ratio);

    WindowFits out;
    out.window = window;
    out.h = ladder.h_at(window + 1);
    out.map = grid::build_shared_map(unit, include_objective);

    const estimator::ExpansionSolver poem(orders.p, r);
    Eigen::PartialPivLU<Eigen::MatrixXd> diff_lu(difference_system(orders.p, r));

    // Per-point value access, precomputed once on the unit.
    struct Plan {
        const grid::SupportPoint* point;
        std::vector<PairAccess> pairs;  // one per consecutive-level difference (objective only)
    };
    std::vector<Plan> plans;
    for (const grid::SupportPoint& p : out.map.points) {
        Plan plan{&p, {}};
        if (p.provenance == grid::Provenance::Objective)
            for (int j = 0; j < k; ++j) plan.pairs.push_back(make_access(p, unit, j));
        plans.push_back(std::move(plan));
    }

    const long long repeats = unit.repeats;
    const long long units_y = ladder.dims == 2 ? repeats : 1;
    const double unit_width = 1.0 / static_cast<double>(repeats);

    auto sample = [&](int j, long long ux, long long uy, const UnitCoord& q) {
        const schemes::FieldLevel& f = fields[window + j];
        const long long s = unit.s_per_level[j];
        long long ix = ux * s + (q.x * s).numerator();
        if (ix >= f.segments) ix -= f.segments;
        long long iy = 0;
        if (ladder.dims == 2) {
            iy = uy * s + (q.y * s).numerator();
            if (iy >= f.segments) iy -= f.segments;
        }
        return f.at(ix, iy);
    };

    Eigen::VectorXd values(k + 1), e(k);
    for (long long uy = 0; uy < units_y; ++uy)
        for (long long ux = 0; ux < repeats; ++ux)
            for (const Plan& plan : plans) {
                const grid::SupportPoint& p = *plan.point;
                PointFit pf;
                pf.x = (static_cast<double>(ux) + to_double(p.pos.x)) * unit_width;
                pf.y = ladder.dims == 2
                           ? (static_cast<double>(uy) + to_double(p.pos.y)) * unit_width
                           : 0.0;
                pf.provenance = p.provenance;
                pf.level_mask = p.level_mask;
                if (p.provenance == grid::Provenance::AllShared) {
                    for (int j = 0; j <= k; ++j) values[j] = sample(j, ux, uy, p.pos);
                    pf.fit = poem.fit(values);
                    pf.ref_level = k + 1;
                    pf.phi_ref = values[k];
                } else {
                    for (int j = 0; j < k; ++j) {
                        const PairAccess& access = plan.pairs[j];
                        double v = 0.0;
                        for (std::size_t i = 0; i < access.coords.size(); ++i)
                            v += access.weights[i] * (sample(j + 1, ux, uy, access.coords[i]) -
                                                      sample(j, ux, uy, access.coords[i]));
                        e[j] = v;
                    }
                    pf.fit.terms = diff_lu.solve(e);
                    const int ref = std::bit_width(p.level_mask);  // finest defining level
                    pf.ref_level = ref;
                    pf.phi_ref = sample(ref - 1, ux, uy, p.pos);
                    double phi_e = pf.phi_ref;
                    for (int m = 0; m < k; ++m)
                        phi_e -= pf.fit.terms[m] * std::pow(r, (ref - 1) * orders.p[m]);
                    pf.fit.phi_e_hat = phi_e;
                }
                out.points.push_back(std::move(pf));
            }
    return out;
}

std::vector<WindowFits> run_midas(const grid::GridLadder& ladder,
                                  const std::vector<schemes::FieldLevel>& fields,
                                  const estimator::PresetOrders& orders) {
    std::vector<WindowFits> out;
    for (int w = 0; w + orders.k() + 1 <= ladder.levels; ++w)
        out.push_back(fit_window(ladder, fields, orders, w, true));
    return out;
}

}  // namespace poem::midas
