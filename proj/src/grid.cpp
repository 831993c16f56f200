#include "poem/grid.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <string>

namespace poem::grid {

namespace {

Fraction pow_fraction(const Fraction& f, int e) {
    Fraction out(1);
    for (int i = 0; i < e; ++i) out *= f;
    return out;
}

unsigned full_mask(int levels) { return (1u << levels) - 1u; }

// Levels (1-based bits) whose unit lattice contains the coordinate.
unsigned coord_mask(const UnitCoord& q, const UnitSignature& unit) {
    unsigned mask = 0;
    for (int l = 0; l < unit.levels(); ++l) {
        const long long s = unit.s_per_level[l];
        bool on = is_integer(q.x * s);
        if (unit.dims == 2) on = on && is_integer(q.y * s);
        if (on) mask |= 1u << l;
    }
    return mask;
}

ObjectiveKind classify(const UnitCoord& q, int dims) {
    if (dims == 1) return ObjectiveKind::Interior;
    if (q.x == Fraction(0) || q.x == Fraction(1)) return ObjectiveKind::EdgeX;
    if (q.y == Fraction(0) || q.y == Fraction(1)) return ObjectiveKind::EdgeY;
    return ObjectiveKind::Interior;
}

}  // namespace

Fraction GridLadder::time_ratio() const {
    switch (path) {
        case RefinementPath::TimeOnly: return ratio;
        case RefinementPath::ConstantCfl: return ratio;
        case RefinementPath::ConstantDiffusion: return ratio * ratio;
    }
    return ratio;
}

Fraction GridLadder::dt_at(int level) const { return dt * pow_fraction(time_ratio(), level - 1); }

double GridLadder::dx_at(int level) const { return 1.0 / static_cast<double>(segments[level - 1]); }

double GridLadder::h_at(int level) const {
    return path == RefinementPath::TimeOnly ? to_double(dt_at(level)) : dx_at(level);
}

GridLadder build_ladder(int dims, long long base_segments, const Fraction& ratio, int levels,
                        RefinementPath path, const TimeBase& time) {
    if (dims != 1 && dims != 2) throw ConfigError("dims must be 1 or 2");
    if (base_segments < 1) throw ConfigError("base segment count must be positive");
    if (levels < 3) throw ConfigError("a ladder needs at least 3 refinement levels");
    if (ratio < Fraction(1, 2) || ratio >= Fraction(1))
        throw ConfigError("refinement ratio must lie in [1/2, 1), got " + to_string(ratio));
    if (time.dt <= Fraction(0)) throw ConfigError("base time step must be positive");
    if (time.t_end <= Fraction(0)) throw ConfigError("end time must be positive");

    GridLadder ladder;
    ladder.dims = dims;
    ladder.base_segments = base_segments;
    ladder.ratio = ratio;
    ladder.levels = levels;
    ladder.path = path;
    ladder.dt = time.dt;
    ladder.t_end = time.t_end;

    const Fraction rt = ladder.time_ratio();
    for (int l = 1; l <= levels; ++l) {
        if (path == RefinementPath::TimeOnly) {
            ladder.segments.push_back(base_segments);
        } else {
            Fraction s = Fraction(base_segments) / pow_fraction(ratio, l - 1);
            if (!is_integer(s))
                throw NonIntegerSegments("level " + std::to_string(l) + " would need " +
                                             to_string(s) + " segments (ratio " + to_string(ratio) +
                                             " from " + std::to_string(base_segments) + ")",
                                         l);
            ladder.segments.push_back(s.numerator());
        }
        Fraction n = time.t_end / (time.dt * pow_fraction(rt, l - 1));
        if (!is_integer(n) || n <= Fraction(0))
            throw NonIntegerSteps("level " + std::to_string(l) + " would need " + to_string(n) +
                                      " time steps (dt " + to_string(time.dt * pow_fraction(rt, l - 1)) +
                                      ", t_end " + to_string(time.t_end) + ")",
                                  l);
        ladder.steps.push_back(n.numerator());
    }
    return ladder;
}

UnitSignature irreducible_unit(const std::vector<long long>& segments, int dims) {
    if (segments.size() < 2) throw ConfigError("a unit needs at least 2 levels");
    long long g = 0;
    for (long long s : segments) g = std::gcd(g, s);
    UnitSignature unit;
    unit.dims = dims;
    unit.repeats = g;
    for (long long s : segments) unit.s_per_level.push_back(s / g);
    return unit;
}

UnitSignature irreducible_unit(const GridLadder& ladder) {
    return irreducible_unit(ladder.segments, ladder.dims);
}

namespace {

// Closed tensor lattice {t/g} x {u/g} over [0,1]^dims.
std::vector<UnitCoord> lattice(long long g, int dims) {
    std::vector<UnitCoord> out;
    if (dims == 1) {
        for (long long t = 0; t <= g; ++t) out.push_back({Fraction(t, g), Fraction(0)});
    } else {
        for (long long u = 0; u <= g; ++u)
            for (long long t = 0; t <= g; ++t) out.push_back({Fraction(t, g), Fraction(u, g)});
    }
    return out;
}

}  // namespace

std::vector<UnitCoord> shared_points(const UnitSignature& unit, int level_i, int level_j) {
    if (level_i < 1 || level_j <= level_i || level_j > unit.levels())
        throw ConfigError("invalid level pair");
    long long g = std::gcd(unit.s_per_level[level_i - 1], unit.s_per_level[level_j - 1]);
    return lattice(g, unit.dims);
}

std::vector<UnitCoord> shared_points_all(const UnitSignature& unit) {
    long long g = 0;
    for (long long s : unit.s_per_level) g = std::gcd(g, s);
    return lattice(g, unit.dims);
}

std::vector<ObjectivePoint> objective_locations(const UnitSignature& unit) {
    const unsigned all = full_mask(unit.levels());
    std::set<UnitCoord> candidates;
    for (int i = 1; i < unit.levels(); ++i)
        for (int j = i + 1; j <= unit.levels(); ++j)
            for (const UnitCoord& q : shared_points(unit, i, j)) candidates.insert(q);

    std::vector<ObjectivePoint> out;
    for (const UnitCoord& q : candidates) {
        unsigned mask = coord_mask(q, unit);
        if (std::popcount(mask) < 2 || mask == all) continue;
        out.push_back({q, mask, classify(q, unit.dims)});
    }
    return out;
}

Fraction shared_fraction(const UnitSignature& unit, bool include_midas) {
    long long g_all = 0;
    for (long long s : unit.s_per_level) g_all = std::gcd(g_all, s);
    // Half-open unit [0,1)^dims: the upper boundary belongs to the neighbour.
    long long usable = unit.dims == 1 ? g_all : g_all * g_all;
    if (include_midas) {
        for (const ObjectivePoint& o : objective_locations(unit))
            if (o.pos.x < Fraction(1) && (unit.dims == 1 || o.pos.y < Fraction(1))) ++usable;
    }
    long long finest = unit.s_per_level.back();
    if (unit.dims == 2) finest *= finest;
    return Fraction(usable, finest);
}

long long SharedPointMap::total_points() const {
    long long n = static_cast<long long>(points.size()) * unit.repeats;
    if (unit.dims == 2) n *= unit.repeats;
    return n;
}

SharedPointMap build_shared_map(const UnitSignature& unit, bool include_objective) {
    SharedPointMap map;
    map.unit = unit;
    const unsigned all = full_mask(unit.levels());

    auto push = [&](const UnitCoord& q, Provenance prov, unsigned mask, ObjectiveKind kind) {
        if (q.x >= Fraction(1)) return;
        if (unit.dims == 2 && q.y >= Fraction(1)) return;
        SupportPoint p;
        p.pos = q;
        p.provenance = prov;
        p.level_mask = mask;
        p.kind = kind;
        for (int l = 0; l < unit.levels(); ++l) {
            if (!(mask & (1u << l))) {
                p.unit_index.push_back({-1, -1});
                continue;
            }
            const long long s = unit.s_per_level[l];
            long long iy = unit.dims == 2 ? (q.y * s).numerator() : 0;
            p.unit_index.push_back({(q.x * s).numerator(), iy});
        }
        map.points.push_back(std::move(p));
    };

    for (const UnitCoord& q : shared_points_all(unit))
        push(q, Provenance::AllShared, all, classify(q, unit.dims));
    if (include_objective)
        for (const ObjectivePoint& o : objective_locations(unit))
            push(o.pos, Provenance::Objective, o.level_mask, o.kind);

    std::sort(map.points.begin(), map.points.end(),
              [](const SupportPoint& a, const SupportPoint& b) { return a.pos < b.pos; });
    return map;
}

}  // namespace poem::grid
