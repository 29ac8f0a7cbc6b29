#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace cdh {

/// Exact rational number. Every coordinate of a PL factor, every metric value
/// of an exact factor, and every displacement bound is a Scalar.
using Scalar = mpq_class;

/// num/den in canonical form. Prefer this to the two-argument mpq_class
/// constructor, which does not canonicalize.
Scalar ratio(long num, long den);

/// 2^exponent, exactly.
Scalar pow2(long exponent);

/// Serialized as "num/den" (denominator always present).
std::string to_string(const Scalar& value);
Scalar parse_scalar(std::string_view text);

Scalar floor_of(const Scalar& value);
/// value - floor(value), in [0, 1).
Scalar frac(const Scalar& value);
Scalar abs_of(const Scalar& value);

}  // namespace cdh
