#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "poem/errors.hpp"
#include "poem/rational.hpp"

namespace poem::grid {

/// Constraint tying the time-step ratio to the spatial ratio along a
/// refinement path: r_t = r_x^s.
enum class RefinementPath {
    TimeOnly,           // spatial grid fixed, only dt refined
    ConstantCfl,        // s = 1, a*dt/dx constant
    ConstantDiffusion,  // s = 2, nu*dt/dx^2 constant
};

struct TimeBase {
    Fraction dt;     // coarsest time step
    Fraction t_end;  // final time
};

/// A sequence of systematically refined uniform periodic grids on [0,1]^dims.
/// Segment and step counts are exact integers at every level by construction.
struct GridLadder {
    int dims = 1;
    long long base_segments = 0;  // per dimension; equal ratios in both dimensions
    Fraction ratio;               // refinement ratio r in [1/2, 1)
    int levels = 0;
    RefinementPath path = RefinementPath::ConstantCfl;
    Fraction dt;
    Fraction t_end;

    std::vector<long long> segments;  // per level, per dimension
    std::vector<long long> steps;     // per level

    Fraction time_ratio() const;      // r_t implied by the path
    Fraction dt_at(int level) const;  // level is 1-based
    double dx_at(int level) const;
    /// Expansion spacing parameter h of a level: dt in time-only mode,
    /// dx otherwise.
    double h_at(int level) const;
};

/// Validates and constructs a ladder. Throws NonIntegerSegments if any level's
/// segment count base/r^(l-1) is non-integral, NonIntegerSteps if t_end is not
/// an integer multiple of some level's dt.
GridLadder build_ladder(int dims, long long base_segments, const Fraction& ratio, int levels,
                        RefinementPath path, const TimeBase& time);

/// Unit-relative coordinate in [0,1]^dims; y is unused when dims == 1.
struct UnitCoord {
    Fraction x;
    Fraction y;

    friend bool operator==(const UnitCoord&, const UnitCoord&) = default;
    friend bool operator<(const UnitCoord& a, const UnitCoord& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// The smallest repeating block of a refined grid set. The full domain is
/// `repeats` concatenated copies of it per dimension.
struct UnitSignature {
    int dims = 1;
    std::vector<long long> s_per_level;  // segments per level inside the unit
    long long repeats = 1;               // gcd of the full-domain segment counts

    int levels() const { return static_cast<int>(s_per_level.size()); }
};

UnitSignature irreducible_unit(const std::vector<long long>& segments, int dims);
UnitSignature irreducible_unit(const GridLadder& ladder);

/// Exact unit-relative coordinates present on both levels of the pair
/// (1-based, i < j). Includes the unit boundaries.
std::vector<UnitCoord> shared_points(const UnitSignature& unit, int level_i, int level_j);

/// Coordinates present on every level of the unit.
std::vector<UnitCoord> shared_points_all(const UnitSignature& unit);

enum class ObjectiveKind {
    Interior,
    EdgeX,  // on a unit edge x = 0 or x = 1 (2D)
    EdgeY,  // on a unit edge y = 0 or y = 1 (2D)
};

struct ObjectivePoint {
    UnitCoord pos;
    unsigned level_mask = 0;  // bit (l-1) set when level l defines phi here
    ObjectiveKind kind = ObjectiveKind::Interior;
};

/// Locations where phi is defined on at least two, but not all, levels of the
/// unit. These are the candidates for densifying the estimation support.
std::vector<ObjectivePoint> objective_locations(const UnitSignature& unit);

/// Fraction of finest-level points per unit usable for error estimation. The
/// duplicate boundary shared with the adjacent unit is attributed to the
/// lower-coordinate unit.
Fraction shared_fraction(const UnitSignature& unit, bool include_midas);

enum class Provenance { AllShared, Objective };

/// One retained location of the estimation support, unit-relative. Grid
/// indices per level are exact integers (q * s_l) where defined, -1 otherwise.
struct SupportPoint {
    UnitCoord pos;
    Provenance provenance = Provenance::AllShared;
    unsigned level_mask = 0;
    ObjectiveKind kind = ObjectiveKind::Interior;
    std::vector<std::array<long long, 2>> unit_index;  // per level {ix, iy}
};

/// Estimation support of a window expressed on its irreducible unit. The
/// full-domain support is `repeats` copies per dimension; points on the upper
/// unit boundary are excluded as duplicates of the neighbouring unit.
struct SharedPointMap {
    UnitSignature unit;
    std::vector<SupportPoint> points;  // sorted by (y, x)

    long long units_per_dim() const { return unit.repeats; }
    long long total_points() const;
};

SharedPointMap build_shared_map(const UnitSignature& unit, bool include_objective);

}  // namespace poem::grid
