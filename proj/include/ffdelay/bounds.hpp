#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ffdelay/bigint.hpp"
#include "ffdelay/error.hpp"

namespace ffdelay {

/// Sharp bound on intermediate magnitudes of unreduced backward substitution
/// on a unit upper-triangular system with inputs in [0, p-1]:
///     (p-1)/2 * [ p^(N-1) + (p-2)^(N-1) ].
/// The division is exact: the bracket is even for odd p, and (p-1) is even
/// otherwise.
inline big_int growth_bound(int n, std::int64_t p)
{
    if (n < 1 || p < 2)
        throw std::domain_error("growth_bound: need N >= 1 and p >= 2");
    const unsigned e = static_cast<unsigned>(n - 1);
    big_int bracket = pow(big_int(p), e) + pow(big_int(p - 2), e);
    return big_int(p - 1) * bracket / 2;
}

/// Number of iterations of the cutoff loop in exact arithmetic: grows the
/// pair (p^N, (p-2)^N) while (p-1)*(p^N + (p-2)^N)/2 < 2^53 holds strictly.
/// Equivalently the largest N with growth_bound(N, p) < 2^53.
inline int nmax(std::int64_t p)
{
    if (p < 2)
        throw std::domain_error("nmax: need p >= 2");
    const big_int limit = max_exact_int_big();
    big_int pp = 1, p2 = 1;
    int n = 0;
    while (big_int(p - 1) * (pp + p2) / 2 < limit) {
        pp *= p;
        p2 *= p - 2;
        ++n;
    }
    return n;
}

/// The delayed solver's safety predicate: dimension N fits modulus p.
inline bool delay(int n, std::int64_t p)
{
    if (n < 1)
        throw std::domain_error("delay: need N >= 1");
    return n <= nmax(p);
}

/// Largest modulus whose cutoff admits dimension N.  nmax is non-increasing
/// in p (growth_bound is strictly increasing in p), so a bracketed binary
/// search returns the same value as the definitional upward scan.
inline std::int64_t pmax(int n)
{
    if (n < 2 || n > 54)
        throw std::domain_error("pmax: N must lie in [2, 54]");
    std::int64_t lo = 2;             // delay(n, 2) holds for every n <= 54
    std::int64_t hi = 94906267;      // delay(n, hi) fails for every n >= 2
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (delay(n, mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/// The definitional upward scan (p = 2, 3, ... until delay fails).  Quadratic
/// in the answer; used to cross-check the search above at small N.
inline std::int64_t pmax_linear_scan(int n)
{
    if (n < 2 || n > 54)
        throw std::domain_error("pmax_linear_scan: N must lie in [2, 54]");
    std::int64_t p = 2;
    while (delay(n, p))
        ++p;
    return p - 1;
}

/// pmax for all N in [2, 54], computed once.
inline const std::array<std::int64_t, 55>& pmax_table()
{
    static const std::array<std::int64_t, 55> table = [] {
        std::array<std::int64_t, 55> t{};
        for (int n = 2; n <= 54; ++n)
            t[static_cast<std::size_t>(n)] = pmax(n);
        return t;
    }();
    return table;
}

struct int_interval {
    big_int lo;
    big_int hi;

    friend bool operator==(const int_interval&, const int_interval&) = default;
};

/// Exact interval propagation through backward substitution: row N-1 carries
/// [0, p-1]; row i carries the range of B_i - sum_{j>i} A_ij * X_j with
/// A_ij, B_i in [0, p-1] and X_j in the row-j interval.  The largest row
/// magnitude re-derives growth_bound(N, p) independently of the formula.
inline std::vector<int_interval> dtrsm_interval_bounds(int n, std::int64_t p)
{
    if (n < 1 || p < 2)
        throw std::domain_error("dtrsm_interval_bounds: need N >= 1 and p >= 2");
    std::vector<int_interval> rows(static_cast<std::size_t>(n));
    const big_int pm1 = p - 1;
    rows[static_cast<std::size_t>(n - 1)] = {big_int(0), pm1};
    for (int i = n - 2; i >= 0; --i) {
        big_int sum_lo = 0, sum_hi = 0;
        for (int j = i + 1; j < n; ++j) {
            const auto& xj = rows[static_cast<std::size_t>(j)];
            if (xj.lo < 0)
                sum_lo += pm1 * xj.lo;     // most negative product over A_ij in [0, p-1]
            if (xj.hi > 0)
                sum_hi += pm1 * xj.hi;
        }
        rows[static_cast<std::size_t>(i)] = {-sum_hi, pm1 - sum_lo};
    }
    return rows;
}

inline big_int max_interval_magnitude(const std::vector<int_interval>& rows)
{
    big_int m = 0;
    for (const auto& r : rows) {
        if (r.hi > m)
            m = r.hi;
        if (-r.lo > m)
            m = -r.lo;
    }
    return m;
}

/// Checks the mediant inequality's hypotheses
///     e <= a/b,  e <= c/d,  0 < b*d
/// and returns whether they hold.  When they do, the conclusion
/// e <= (a+c)/(b+d) is asserted in exact rational arithmetic; the inequality
/// is a theorem, so a failed conclusion is a fatal internal error.
inline bool mediant_step(const big_rational& a, const big_rational& b, const big_rational& c,
                         const big_rational& d, const big_rational& e)
{
    if (b == 0 || d == 0 || b + d == 0)
        throw std::domain_error("mediant_step: zero denominator");
    const bool hypotheses = e <= a / b && e <= c / d && big_rational(0) < b * d;
    if (!hypotheses)
        return false;
    if (!(e <= (a + c) / (b + d)))
        throw std::logic_error("mediant_step: conclusion violated under valid hypotheses");
    return true;
}

/// Output range of the negated-update matrix product: [(1-p)(p-1)M, p-1].
inline std::pair<big_int, big_int> gemm_output_interval(std::int64_t p, int m)
{
    if (p < 2 || m < 1)
        throw std::domain_error("gemm_output_interval: need p >= 2 and M >= 1");
    return {big_int(1 - p) * (p - 1) * m, big_int(p - 1)};
}

} // namespace ffdelay
