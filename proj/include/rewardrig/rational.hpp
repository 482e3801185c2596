#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace rewardrig {

/// Exact arbitrary-precision rational. All probability and reward arithmetic
/// outside the Q-learning module goes through this type.
using Rational = mpq_class;

/// Parses "p/q", an integer, or a finite decimal such as "-0.1" exactly.
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when the denominator is 1).
std::string format_rational(const Rational& value);

inline Rational abs_value(const Rational& value) { return value < 0 ? Rational(-value) : value; }

}  // namespace rewardrig
