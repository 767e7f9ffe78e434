#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>

#include "ffdelay/error.hpp"

namespace ffdelay {

using big_int = boost::multiprecision::cpp_int;
using big_rational = boost::multiprecision::cpp_rational;

// Largest integer magnitude a binary64 mantissa holds contiguously: every
// integer v with |v| <= 2^53 is representable; 2^53 + 1 is the first gap.
inline constexpr std::int64_t max_exact_int = 9007199254740992;

inline big_int max_exact_int_big()
{
    return big_int(max_exact_int);
}

/// True iff x is finite with zero fractional part (any magnitude).
inline bool is_integer_valued(double x)
{
    return std::isfinite(x) && std::trunc(x) == x;
}

/// The exact integer stored in x, or nullopt if x is not integer-valued.
inline std::optional<big_int> exact_integer_of(double x)
{
    if (!is_integer_valued(x))
        return std::nullopt;
    return big_int(x);
}

/// True iff the binary64 value fp is exactly the integer e.
inline bool double_equals_exact(double fp, const big_int& e)
{
    auto v = exact_integer_of(fp);
    return v.has_value() && *v == e;
}

/// Exact rational value of a finite binary64 (binary64s are dyadic rationals).
inline big_rational rational_of(double x)
{
    if (!std::isfinite(x))
        throw conversion_error("rational_of: value is not finite");
    return big_rational(x);
}

} // namespace ffdelay
