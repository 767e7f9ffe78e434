#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ffdelay/bigint.hpp"
#include "ffdelay/bounds.hpp"
#include "ffdelay/error.hpp"
#include "ffdelay/matrix.hpp"

namespace ffdelay {

enum class op_kind { mul, sub, add, rem };

inline const char* op_kind_name(op_kind k)
{
    switch (k) {
    case op_kind::mul: return "mul";
    case op_kind::sub: return "sub";
    case op_kind::add: return "add";
    case op_kind::rem: return "rem";
    }
    return "?";
}

/// Loop coordinates of one scalar floating-point operation.
struct op_site {
    int i = -1;
    int j = -1;
    int k = -1;
};

struct op_event {
    op_kind kind;
    op_site site;
};

/// Receives one event per scalar floating-point operation, in execution order.
class op_sink {
public:
    virtual ~op_sink() = default;
    virtual void on_op(const op_event&) = 0;
};

struct kernel_options {
    /// Evaluate the per-update range assertion of the negated matrix product
    /// in exact rational arithmetic (throws contract_error on violation).
    bool check_asserts = false;
    /// Validate documented value preconditions before touching any output.
    /// The certification oracle replays out-of-contract instances with this
    /// off; shape and dimension contracts stay enforced regardless.
    bool enforce_preconditions = true;
    /// When non-null, every scalar operation is reported here.
    op_sink* sink = nullptr;
};

/// Scalar semantics the kernels are instantiated over.  double runs the
/// plain program; the shadow scalar pairs every value with an exact integer;
/// the symbolic scalar records a straight-line trace.
template <class S>
struct scalar_ops; // specialized per scalar type

template <>
struct scalar_ops<double> {
    static constexpr bool has_value = true;
    static double value(double x) { return x; }
    static big_rational exact_rational(double x) { return rational_of(x); }
    static double mul(double a, double b, op_site) { return a * b; }
    static double sub(double a, double b, op_site) { return a - b; }
    static double fmod_p(double x, std::int64_t p, op_site) { return std::fmod(x, static_cast<double>(p)); }
    static double add_p(double x, std::int64_t p, op_site) { return x + static_cast<double>(p); }
    static bool is_negative(double x) { return x < 0; }
};

template <class S>
concept kernel_scalar = requires(const S& a, const S& b, op_site site) {
    { scalar_ops<S>::mul(a, b, site) } -> std::same_as<S>;
    { scalar_ops<S>::sub(a, b, site) } -> std::same_as<S>;
};

namespace detail {

inline void notify(const kernel_options& opts, op_kind kind, op_site site)
{
    if (opts.sink)
        opts.sink->on_op({kind, site});
}

template <class S>
bool view_bounded_by(matrix_view<const S> x, std::int64_t lo, std::int64_t hi)
{
    using ops = scalar_ops<S>;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double v = ops::value(x(i, j));
            if (!(is_integer_valued(v) && static_cast<double>(lo) <= v &&
                  v <= static_cast<double>(hi)))
                return false;
        }
    return true;
}

template <class S>
bool view_exact_int(matrix_view<const S> x)
{
    using ops = scalar_ops<S>;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double v = ops::value(x(i, j));
            if (!is_integer_valued(v) || v > static_cast<double>(max_exact_int) ||
                v < -static_cast<double>(max_exact_int))
                return false;
        }
    return true;
}

/// Loop assertion of the negated product: after the (j+1)-th inner update,
///   -1 <= Y/((p-1)^2 (j+1))  and  Y <= p-1,
/// checked with exact rationals.
template <class S>
void check_gemm_assert(const S& y, std::int64_t p, op_site site)
{
    const big_rational v = scalar_ops<S>::exact_rational(y);
    const big_rational den = big_rational(p - 1) * (p - 1) * (site.j + 1);
    if (!(big_rational(-1) <= v / den && v <= big_rational(p - 1)))
        throw contract_error("dgemm_neg: range assertion violated at (i=" +
                             std::to_string(site.i) + ", j=" + std::to_string(site.j) +
                             ", k=" + std::to_string(site.k) + ")");
}

} // namespace detail

/// Y <- Y - A*X with no reduction: A is N x M, X is M x K, Y is N x K, all
/// entries in [0, p-1], and (p-1)^2 * M <= 2^53 so every update is exact.
/// Loop order is i outer, j middle, k inner; each update is one multiply and
/// one subtract.
template <kernel_scalar S>
void dgemm_neg(std::int64_t p, matrix_view<const S> a, matrix_view<const S> x,
               matrix_view<S> y, const kernel_options& opts = {})
{
    using ops = scalar_ops<S>;
    const int n = a.rows(), m = a.cols(), kc = x.cols();
    if (x.rows() != m || y.rows() != n || y.cols() != kc)
        throw contract_error("dgemm_neg: shape mismatch");
    if (p < 2)
        throw std::domain_error("dgemm_neg: need p >= 2");
    if constexpr (ops::has_value) {
        if (opts.enforce_preconditions) {
            if (m >= 1 && big_int(p - 1) * (p - 1) * m > max_exact_int_big())
                throw contract_error("dgemm_neg: (p-1)^2*M exceeds 2^53");
            if (!detail::view_bounded_by<S>(a, 0, p - 1) ||
                !detail::view_bounded_by<S>(x, 0, p - 1) ||
                !detail::view_bounded_by<S>(y.as_const(), 0, p - 1))
                throw contract_error("dgemm_neg: inputs must lie in [0, p-1]");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < kc; ++k) {
                const op_site site{i, j, k};
                S prod = ops::mul(a(i, j), x(j, k), site);
                detail::notify(opts, op_kind::mul, site);
                y(i, k) = ops::sub(y(i, k), prod, site);
                detail::notify(opts, op_kind::sub, site);
                if (opts.check_asserts)
                    detail::check_gemm_assert(y(i, k), p, site);
            }
}

/// Componentwise remainder: truncated fmod, then one conditional +p, leaving
/// every entry in [0, p-1] and congruent to its old value mod p.
template <kernel_scalar S>
void dremm(std::int64_t p, matrix_view<S> x, const kernel_options& opts = {})
{
    using ops = scalar_ops<S>;
    if (p <= 0)
        throw std::domain_error("dremm: modulus must be positive");
    if constexpr (ops::has_value) {
        if (opts.enforce_preconditions && !detail::view_exact_int(x.as_const()))
            throw contract_error("dremm: input must be an exact integer matrix");
    }
    for (int i = 0; i < x.rows(); ++i)
        for (int k = 0; k < x.cols(); ++k) {
            const op_site site{i, -1, k};
            x(i, k) = ops::fmod_p(x(i, k), p, site);
            detail::notify(opts, op_kind::rem, site);
            if (ops::is_negative(x(i, k))) {
                x(i, k) = ops::add_p(x(i, k), p, site);
                detail::notify(opts, op_kind::add, site);
            }
        }
}

/// Unreduced backward substitution on a unit upper-triangular system,
/// X <- A^{-1} X over the integers.  Requires N <= 54 and entries bounded by
/// pmax(N)-1 on the strictly upper triangle of A and all of X; the diagonal
/// is never read.  Loop order: i from N-2 down to 0, j from i+1 to N-1, k
/// inner.
template <kernel_scalar S>
void dtrsm(matrix_view<const S> a, matrix_view<S> x, const kernel_options& opts = {})
{
    using ops = scalar_ops<S>;
    const int n = a.rows();
    const int kc = x.cols();
    if (a.cols() != n || x.rows() != n)
        throw contract_error("dtrsm: A must be N x N and X must be N x K");
    if (n > 54)
        throw contract_error("dtrsm: N must be at most 54");
    if constexpr (ops::has_value) {
        if (opts.enforce_preconditions && n >= 2) {
            const std::int64_t bound = pmax_table()[static_cast<std::size_t>(n)] - 1;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double v = ops::value(a(i, j));
                    if (!(is_integer_valued(v) && 0 <= v && v <= static_cast<double>(bound)))
                        throw contract_error("dtrsm: A(" + std::to_string(i) + "," +
                                             std::to_string(j) + ") outside [0, pmax(N)-1]");
                }
            if (!detail::view_bounded_by<S>(x.as_const(), 0, bound))
                throw contract_error("dtrsm: X outside [0, pmax(N)-1]");
        }
    }
    for (int i = n - 2; i >= 0; --i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < kc; ++k) {
                const op_site site{i, j, k};
                S prod = ops::mul(a(i, j), x(j, k), site);
                detail::notify(opts, op_kind::mul, site);
                x(i, k) = ops::sub(x(i, k), prod, site);
                detail::notify(opts, op_kind::sub, site);
            }
}

/// Delayed solve of A X = B mod p for unit upper-triangular A: recurse on
/// halves, with the unreduced solver plus one componentwise remainder at
/// dimensions within the cutoff.  B ends with the reduced solution in
/// [0, p-1].  Requires (p-1)^2 * N <= 2^53 and nmax_cutoff >= 1.
template <kernel_scalar S>
void lz_trsm(std::int64_t p, int nmax_cutoff, matrix_view<const S> a, matrix_view<S> b,
             const kernel_options& opts = {})
{
    using ops = scalar_ops<S>;
    const int n = a.rows();
    const int kc = b.cols();
    if (a.cols() != n || b.rows() != n)
        throw contract_error("lz_trsm: A must be N x N and B must be N x K");
    if (n < 1)
        return;
    if (nmax_cutoff < 1)
        throw contract_error("lz_trsm: cutoff must be at least 1");
    if (p < 2)
        throw std::domain_error("lz_trsm: need p >= 2");
    if constexpr (ops::has_value) {
        if (opts.enforce_preconditions) {
            if (big_int(p - 1) * (p - 1) * n > max_exact_int_big())
                throw contract_error("lz_trsm: (p-1)^2*N exceeds 2^53");
            if (!detail::view_bounded_by<S>(a, 0, p - 1) ||
                !detail::view_bounded_by<S>(b.as_const(), 0, p - 1))
                throw contract_error("lz_trsm: inputs must lie in [0, p-1]");
        }
    }
    if (n <= nmax_cutoff) {
        // The unreduced solver is exact only inside the cutoff envelope.
        if (!(n <= 54 && delay(n, p)))
            throw contract_error("lz_trsm: base case outside the exactness envelope (N=" +
                                 std::to_string(n) + ", p=" + std::to_string(p) + ")");
        dtrsm<S>(a, b, opts);
        dremm<S>(p, b.block(0, 0, n - 1, kc), opts);
        if constexpr (ops::has_value) {
            // Row N-1 is untouched by the solver and must already be reduced.
            if (opts.enforce_preconditions &&
                !detail::view_bounded_by<S>(b.block(n - 1, 0, 1, kc).as_const(), 0, p - 1))
                throw contract_error("lz_trsm: last row left [0, p-1]");
        }
    } else {
        const int top = n / 2;
        const int rest = n - top;
        lz_trsm<S>(p, nmax_cutoff, a.block(top, top, rest, rest), b.block(top, 0, rest, kc), opts);
        dgemm_neg<S>(p, a.block(0, top, top, rest), b.block(top, 0, rest, kc).as_const(),
                     b.block(0, 0, top, kc), opts);
        dremm<S>(p, b.block(0, 0, top, kc), opts);
        lz_trsm<S>(p, nmax_cutoff, a.block(0, 0, top, top), b.block(0, 0, top, kc), opts);
    }
}

} // namespace ffdelay
