#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ffdelay/bigint.hpp"
#include "ffdelay/bounds.hpp"
#include "ffdelay/error.hpp"
#include "ffdelay/matrix.hpp"
#include "ffdelay/shadow.hpp"

namespace ffdelay {

/// Classical (non-delayed) solve of A X = B mod p for unit upper-triangular
/// A: backward substitution with a reduction into [0, p-1] after every
/// multiply and every subtract, the strictest classical schedule.
inline exact_matrix reference_solve(matrix_view<const big_int> a, matrix_view<const big_int> b,
                                    std::int64_t p)
{
    const int n = a.rows();
    const int kc = b.cols();
    if (a.cols() != n || b.rows() != n)
        throw contract_error("reference_solve: A must be N x N and B must be N x K");
    if (p < 2)
        throw std::domain_error("reference_solve: need p >= 2");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (a(i, j) < 0 || a(i, j) >= p)
                throw contract_error("reference_solve: A outside [0, p-1]");
    auto reduce = [p](big_int v) {
        v %= p;
        if (v < 0)
            v += p;
        return v;
    };
    exact_matrix x(n, kc);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < kc; ++k) {
            if (b(i, k) < 0 || b(i, k) >= p)
                throw contract_error("reference_solve: B outside [0, p-1]");
            x(i, k) = b(i, k);
        }
    for (int i = n - 1; i >= 0; --i)
        for (int k = 0; k < kc; ++k) {
            big_int acc = x(i, k);
            for (int j = i + 1; j < n; ++j) {
                big_int t = reduce(a(i, j) * x(j, k));
                acc = reduce(acc - t);
            }
            x(i, k) = std::move(acc);
        }
    return x;
}

/// A unit upper-triangular instance (A, B) together with the largest
/// magnitude any scalar operation of the unreduced solve reaches on it.
struct worst_case {
    fp_matrix a;
    fp_matrix b;
    big_int peak;
    int peak_row = 0;
    bool attains_bound = false;
};

enum class search_mode {
    exhaustive, ///< complete search, dimension at most 6
    heuristic   ///< greedy interval-argmax construction, any dimension
};

namespace detail {

/// Exact backward substitution on one column, reporting the largest
/// magnitude over all products and partial values, and which row it
/// occurred in.
inline std::pair<big_int, int> simulate_peak(const std::vector<std::vector<big_int>>& a,
                                             const std::vector<big_int>& b,
                                             std::vector<big_int>* solution = nullptr)
{
    const int n = static_cast<int>(b.size());
    std::vector<big_int> x = b;
    big_int peak = 0;
    int peak_row = n - 1;
    auto see = [&](const big_int& v, int row) {
        big_int m = abs(v);
        if (m > peak) {
            peak = std::move(m);
            peak_row = row;
        }
    };
    see(x[static_cast<std::size_t>(n - 1)], n - 1);
    for (int i = n - 2; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) {
            big_int prod = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                           x[static_cast<std::size_t>(j)];
            see(prod, i);
            x[static_cast<std::size_t>(i)] -= prod;
            see(x[static_cast<std::size_t>(i)], i);
        }
    }
    if (solution)
        *solution = std::move(x);
    return {peak, peak_row};
}

inline worst_case pack_instance(const std::vector<std::vector<big_int>>& a,
                                const std::vector<big_int>& b, big_int peak, int peak_row,
                                std::int64_t p)
{
    const int n = static_cast<int>(b.size());
    worst_case out;
    out.a = fp_matrix(n, n, 0.0);
    out.b = fp_matrix(n, 1, 0.0);
    for (int i = 0; i < n; ++i) {
        out.a(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j)
            out.a(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                              .convert_to<double>();
        out.b(i, 0) = b[static_cast<std::size_t>(i)].convert_to<double>();
    }
    out.peak = std::move(peak);
    out.peak_row = peak_row;
    out.attains_bound = out.peak == growth_bound(n, p);
    return out;
}

} // namespace detail

/// Searches for an instance maximizing the peak intermediate magnitude of
/// the unreduced solve with inputs in [0, p-1].
///
/// Exhaustive mode enumerates the strictly upper entries and B over
/// {0, p-1}.  That grid is complete: every intermediate is affine in each
/// input separately, so each |value| is coordinate-wise convex and the
/// maximum over the box [0, p-1]^vars is attained at a vertex.
///
/// Heuristic mode builds one instance bottom-up, choosing each row's inputs
/// to reach the more extreme of the two endpoint candidates given the rows
/// already fixed (the interval-propagation argmax choices); it carries no
/// attainability guarantee.
inline worst_case worst_case_instance(int n, std::int64_t p, search_mode mode)
{
    if (p < 2)
        throw std::domain_error("worst_case_instance: need p >= 2");
    const big_int pm1 = p - 1;
    if (mode == search_mode::exhaustive) {
        if (n < 2 || n > 6)
            throw std::domain_error("worst_case_instance: exhaustive mode needs 2 <= N <= 6");
        const int uppers = n * (n - 1) / 2;
        const int vars = uppers + n;
        std::vector<std::vector<big_int>> a(static_cast<std::size_t>(n),
                                            std::vector<big_int>(static_cast<std::size_t>(n), 0));
        std::vector<big_int> b(static_cast<std::size_t>(n), 0);
        std::vector<std::vector<big_int>> best_a = a;
        std::vector<big_int> best_b = b;
        big_int best_peak = -1;
        int best_row = 0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << vars); ++mask) {
            int bit = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        (mask >> bit++) & 1 ? pm1 : 0;
            for (int i = 0; i < n; ++i)
                b[static_cast<std::size_t>(i)] = (mask >> bit++) & 1 ? pm1 : 0;
            auto [peak, row] = detail::simulate_peak(a, b);
            if (peak > best_peak) {
                best_peak = std::move(peak);
                best_row = row;
                best_a = a;
                best_b = b;
            }
        }
        return detail::pack_instance(best_a, best_b, std::move(best_peak), best_row, p);
    }

    if (n < 1)
        throw std::domain_error("worst_case_instance: need N >= 1");
    std::vector<std::vector<big_int>> a(static_cast<std::size_t>(n),
                                        std::vector<big_int>(static_cast<std::size_t>(n), 0));
    std::vector<big_int> b(static_cast<std::size_t>(n), 0);
    std::vector<big_int> x(static_cast<std::size_t>(n), 0);
    b[static_cast<std::size_t>(n - 1)] = pm1;
    x[static_cast<std::size_t>(n - 1)] = pm1;
    for (int i = n - 2; i >= 0; --i) {
        big_int pos_sum = 0, neg_sum = 0; // sums of positive / |negative| x_j below
        for (int j = i + 1; j < n; ++j) {
            const big_int& xj = x[static_cast<std::size_t>(j)];
            if (xj > 0)
                pos_sum += xj;
            else
                neg_sum += -xj;
        }
        const big_int most_negative = -pm1 * pos_sum;
        const big_int most_positive = pm1 + pm1 * neg_sum;
        const bool go_negative = -most_negative >= most_positive;
        b[static_cast<std::size_t>(i)] = go_negative ? 0 : pm1;
        for (int j = i + 1; j < n; ++j) {
            const big_int& xj = x[static_cast<std::size_t>(j)];
            const bool take = go_negative ? xj > 0 : xj < 0;
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = take ? pm1 : 0;
        }
        x[static_cast<std::size_t>(i)] = go_negative ? most_negative : most_positive;
    }
    auto [peak, row] = detail::simulate_peak(a, b);
    return detail::pack_instance(a, b, std::move(peak), row, p);
}

/// True iff the unreduced solve of this instance performs at least one
/// operation whose exact result is not representable in binary64.
inline bool instance_rounds(const worst_case& inst)
{
    const int n = inst.b.rows();
    std::vector<std::vector<big_int>> a(static_cast<std::size_t>(n),
                                        std::vector<big_int>(static_cast<std::size_t>(n), 0));
    std::vector<big_int> b(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        b[static_cast<std::size_t>(i)] = big_int(inst.b(i, 0));
        for (int j = i + 1; j < n; ++j)
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = big_int(inst.a(i, j));
    }
    bool rounds = false;
    std::vector<big_int> x = b;
    auto see = [&](const big_int& v) {
        if (!double_equals_exact(v.convert_to<double>(), v))
            rounds = true;
    };
    for (int i = n - 2; i >= 0 && !rounds; --i)
        for (int j = i + 1; j < n && !rounds; ++j) {
            big_int prod = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                           x[static_cast<std::size_t>(j)];
            see(prod);
            x[static_cast<std::size_t>(i)] -= prod;
            see(x[static_cast<std::size_t>(i)]);
        }
    return rounds;
}

/// An instance guaranteed (when one exists) to make the unreduced solve
/// round.  The greedy extreme instance can stay exact past the cutoff when
/// every over-limit intermediate happens to be even — above 2^53 binary64
/// represents exactly the even integers — so the low bit of one B entry is
/// perturbed to force an odd over-limit value.
inline worst_case rounding_witness_instance(int n, std::int64_t p)
{
    worst_case inst = worst_case_instance(n, p, search_mode::heuristic);
    if (instance_rounds(inst))
        return inst;
    for (int attempt = 0; attempt < 2 * n; ++attempt) {
        const int row = (inst.peak_row + attempt / 2) % n;
        const double delta = attempt % 2 == 0 ? 1.0 : -1.0;
        worst_case probe = inst;
        const double nb = probe.b(row, 0) + delta;
        if (nb < 0 || nb > static_cast<double>(p - 1))
            continue;
        probe.b(row, 0) = nb;
        auto [peak, prow] = [&] {
            const int nn = probe.b.rows();
            std::vector<std::vector<big_int>> a(
                static_cast<std::size_t>(nn), std::vector<big_int>(static_cast<std::size_t>(nn), 0));
            std::vector<big_int> bb(static_cast<std::size_t>(nn), 0);
            for (int i = 0; i < nn; ++i) {
                bb[static_cast<std::size_t>(i)] = big_int(probe.b(i, 0));
                for (int j = i + 1; j < nn; ++j)
                    a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        big_int(probe.a(i, j));
            }
            return detail::simulate_peak(a, bb);
        }();
        probe.peak = std::move(peak);
        probe.peak_row = prow;
        probe.attains_bound = probe.peak == growth_bound(n, p);
        if (instance_rounds(probe))
            return probe;
    }
    return inst; // no rounding witness found; caller decides what that means
}

/// Uniformly random unit upper-triangular instance with entries in [0, p-1].
struct solve_instance {
    fp_matrix a;
    fp_matrix b;
};

inline solve_instance random_unit_upper_instance(std::mt19937_64& rng, int n, int k,
                                                 std::int64_t p)
{
    std::uniform_int_distribution<std::int64_t> entry(0, p - 1);
    solve_instance out;
    out.a = fp_matrix(n, n, 0.0);
    out.b = fp_matrix(n, k, 0.0);
    for (int i = 0; i < n; ++i) {
        out.a(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j)
            out.a(i, j) = static_cast<double>(entry(rng));
        for (int c = 0; c < k; ++c)
            out.b(i, c) = static_cast<double>(entry(rng));
    }
    return out;
}

} // namespace ffdelay
