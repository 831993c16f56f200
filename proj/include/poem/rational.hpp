#pragma once

#include <boost/rational.hpp>
#include <string>

namespace poem {

// Lattice coordinates, refinement ratios, and time steps are kept as exact
// rationals; conversion to double happens only at solver and estimator
// boundaries.
using Fraction = boost::rational<long long>;

inline double to_double(const Fraction& f) { return boost::rational_cast<double>(f); }

inline bool is_integer(const Fraction& f) { return f.denominator() == 1; }

/// Parses "2/3", "5", or a plain decimal such as "0.01" into an exact rational.
Fraction parse_fraction(const std::string& text);

std::string to_string(const Fraction& f);

}  // namespace poem
