#pragma once

#include <cstdint>
#include <stdexcept>

#include "ffdelay/bigint.hpp"

namespace ffdelay {

// No modulus above this value admits any delayed solve of dimension >= 2:
// (p-1)^2 must stay within 2^53.
inline constexpr std::int64_t max_field_modulus = 94906266;

/// Deterministic trial division; exact for the magnitudes used here.
inline bool is_prime(std::int64_t n)
{
    if (n < 2)
        return false;
    if (n % 2 == 0)
        return n == 2;
    for (std::int64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0)
            return false;
    return true;
}

inline std::int64_t largest_prime_at_most(std::int64_t n)
{
    for (std::int64_t p = n; p >= 2; --p)
        if (is_prime(p))
            return p;
    throw std::domain_error("largest_prime_at_most: no prime below " + std::to_string(n));
}

/// Field modulus with lazily verified primality.  Kernels other than the
/// remainder semantics are correct for composite p too, so a composite
/// modulus is a caller-level warning rather than an error here.
class field_params {
public:
    explicit field_params(std::int64_t p) : p_(p)
    {
        if (p < 2 || p > max_field_modulus)
            throw std::domain_error("field_params: modulus must lie in [2, " +
                                    std::to_string(max_field_modulus) + "]");
    }

    std::int64_t modulus() const { return p_; }

    /// Whether primality has been verified (never set for composite p).
    bool prime_checked() const { return prime_checked_; }

    /// Runs the primality test once; returns whether p is prime.
    bool verify_prime()
    {
        if (!tested_) {
            tested_ = true;
            prime_checked_ = is_prime(p_);
        }
        return prime_checked_;
    }

private:
    std::int64_t p_;
    bool tested_ = false;
    bool prime_checked_ = false;
};

} // namespace ffdelay
