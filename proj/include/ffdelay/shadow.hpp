#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ffdelay/bigint.hpp"
#include "ffdelay/error.hpp"
#include "ffdelay/kernels.hpp"
#include "ffdelay/matrix.hpp"

namespace ffdelay {

struct shadow_discrepancy {
    std::size_t op_index = 0;
    op_kind kind = op_kind::mul;
    op_site site;
    double lhs_fp = 0.0;
    double rhs_fp = 0.0;
    double fp_result = 0.0;
    big_int exact_result;
};

/// Outcome of replaying a kernel with paired (binary64, exact integer)
/// values: after every scalar operation the binary64 result must convert
/// losslessly back to the exact result.  Exactness is certified iff no
/// operation disagreed.
struct shadow_report {
    std::size_t ops_checked = 0;
    std::vector<shadow_discrepancy> discrepancies;
    big_int max_abs_value;

    bool certified() const { return discrepancies.empty(); }

    void write(std::ostream& out) const
    {
        out << "ops checked: " << ops_checked << '\n';
        out << "discrepancies: " << discrepancies.size() << '\n';
        out << "max abs value: " << max_abs_value << '\n';
        for (const auto& d : discrepancies)
            out << "discrepancy: op " << d.op_index << ' ' << op_kind_name(d.kind) << " lhs "
                << d.lhs_fp << " rhs " << d.rhs_fp << " fp " << d.fp_result << " exact "
                << d.exact_result << '\n';
    }
};

/// One binary64 value paired with the exact integer the computation would
/// produce without rounding.  The two sides agree until an operation rounds.
struct shadow_scalar {
    double fp = 0.0;
    big_int exact;
    shadow_report* report = nullptr;
};

namespace detail {

inline shadow_report* shadow_ctx(const shadow_scalar& a, const shadow_scalar& b)
{
    return a.report ? a.report : b.report;
}

inline shadow_scalar shadow_record(shadow_report* rep, op_kind kind, op_site site, double lhs,
                                   double rhs, double fp, big_int exact)
{
    if (rep) {
        if (!double_equals_exact(fp, exact))
            rep->discrepancies.push_back({rep->ops_checked, kind, site, lhs, rhs, fp, exact});
        big_int mag = abs(exact);
        if (mag > rep->max_abs_value)
            rep->max_abs_value = std::move(mag);
        ++rep->ops_checked;
    }
    return {fp, std::move(exact), rep};
}

} // namespace detail

template <>
struct scalar_ops<shadow_scalar> {
    static constexpr bool has_value = true;
    static double value(const shadow_scalar& x) { return x.fp; }
    static big_rational exact_rational(const shadow_scalar& x) { return big_rational(x.exact); }

    static shadow_scalar mul(const shadow_scalar& a, const shadow_scalar& b, op_site site)
    {
        return detail::shadow_record(detail::shadow_ctx(a, b), op_kind::mul, site, a.fp, b.fp,
                                     a.fp * b.fp, a.exact * b.exact);
    }

    static shadow_scalar sub(const shadow_scalar& a, const shadow_scalar& b, op_site site)
    {
        return detail::shadow_record(detail::shadow_ctx(a, b), op_kind::sub, site, a.fp, b.fp,
                                     a.fp - b.fp, a.exact - b.exact);
    }

    // fmod on integers is truncated division: the remainder keeps the sign of
    // the dividend.
    static shadow_scalar fmod_p(const shadow_scalar& x, std::int64_t p, op_site site)
    {
        return detail::shadow_record(x.report, op_kind::rem, site, x.fp, static_cast<double>(p),
                                     std::fmod(x.fp, static_cast<double>(p)), x.exact % p);
    }

    static shadow_scalar add_p(const shadow_scalar& x, std::int64_t p, op_site site)
    {
        return detail::shadow_record(x.report, op_kind::add, site, x.fp, static_cast<double>(p),
                                     x.fp + static_cast<double>(p), x.exact + p);
    }

    static bool is_negative(const shadow_scalar& x) { return x.fp < 0; }
};

using shadow_matrix = matrix<shadow_scalar>;

namespace detail {

inline shadow_matrix make_shadow(matrix_view<const double> m, shadow_report& rep)
{
    shadow_matrix out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            auto v = exact_integer_of(m(i, j));
            if (!v || *v > max_exact_int || *v < -max_exact_int)
                throw contract_error("shadow run: input (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") is not an exact integer within 2^53");
            out(i, j) = {m(i, j), std::move(*v), &rep};
        }
    return out;
}

inline void copy_fp_back(const shadow_matrix& s, matrix_view<double> m)
{
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            m(i, j) = s(i, j).fp;
}

inline kernel_options shadow_opts(kernel_options opts)
{
    // The oracle observes; callers check contracts on the plain kernels.
    opts.enforce_preconditions = false;
    return opts;
}

} // namespace detail

/// Replays the unreduced solver with paired values; X receives the binary64
/// results (bit-identical to a plain run on the same inputs).
inline shadow_report shadow_dtrsm(matrix_view<const double> a, matrix_view<double> x,
                                  const kernel_options& opts = {})
{
    shadow_report rep;
    shadow_matrix sa = detail::make_shadow(a, rep);
    shadow_matrix sx = detail::make_shadow(x.as_const(), rep);
    dtrsm<shadow_scalar>(sa.view(), sx.view(), detail::shadow_opts(opts));
    detail::copy_fp_back(sx, x);
    return rep;
}

inline shadow_report shadow_dgemm_neg(std::int64_t p, matrix_view<const double> a,
                                      matrix_view<const double> x, matrix_view<double> y,
                                      const kernel_options& opts = {})
{
    shadow_report rep;
    shadow_matrix sa = detail::make_shadow(a, rep);
    shadow_matrix sx = detail::make_shadow(x, rep);
    shadow_matrix sy = detail::make_shadow(y.as_const(), rep);
    dgemm_neg<shadow_scalar>(p, sa.view(), sx.view(), sy.view(), detail::shadow_opts(opts));
    detail::copy_fp_back(sy, y);
    return rep;
}

inline shadow_report shadow_dremm(std::int64_t p, matrix_view<double> x,
                                  const kernel_options& opts = {})
{
    shadow_report rep;
    shadow_matrix sx = detail::make_shadow(x.as_const(), rep);
    dremm<shadow_scalar>(p, sx.view(), detail::shadow_opts(opts));
    detail::copy_fp_back(sx, x);
    return rep;
}

inline shadow_report shadow_lz_trsm(std::int64_t p, int nmax_cutoff, matrix_view<const double> a,
                                    matrix_view<double> b, const kernel_options& opts = {})
{
    shadow_report rep;
    shadow_matrix sa = detail::make_shadow(a, rep);
    shadow_matrix sb = detail::make_shadow(b.as_const(), rep);
    lz_trsm<shadow_scalar>(p, nmax_cutoff, sa.view(), sb.view(), detail::shadow_opts(opts));
    detail::copy_fp_back(sb, b);
    return rep;
}

} // namespace ffdelay
