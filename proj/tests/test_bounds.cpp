#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ffdelay/bounds.hpp"
#include "ffdelay/field.hpp"

using namespace ffdelay;

namespace {

// Independent route to the cutoff: scan the closed-form bound directly.
int nmax_by_formula(std::int64_t p)
{
    int n = 0;
    while (growth_bound(n + 1, p) < max_exact_int_big())
        ++n;
    return n;
}

// The cutoff loop evaluated with plain binary64 arithmetic, the way the
// original routine runs it.  Used to confirm that rounding in pp/p2 never
// changes an iteration count in the ranges we touch.
int nmax_binary64(std::int64_t p)
{
    const double limit = 9007199254740992.0;
    double pp = 1.0, p2 = 1.0;
    int n = 0;
    while ((static_cast<double>(p - 1) * (pp + p2)) / 2.0 < limit) {
        pp *= static_cast<double>(p);
        p2 *= static_cast<double>(p - 2);
        ++n;
    }
    return n;
}

} // namespace

TEST(GrowthBound, ClosedFormExamples)
{
    // N=2 collapses to (p-1)^2.
    for (std::int64_t p : {2, 3, 5, 97, 1553})
        EXPECT_EQ(growth_bound(2, p), big_int(p - 1) * (p - 1));
    EXPECT_EQ(growth_bound(3, 3), 10);
    EXPECT_EQ(growth_bound(4, 3), 28);
    EXPECT_EQ(growth_bound(4, 5), 304);
    EXPECT_EQ(growth_bound(1, 7), 6);
    // p = 2 closed form: 2^(N-2).
    for (int n = 2; n <= 54; ++n)
        EXPECT_EQ(growth_bound(n, 2), big_int(1) << (n - 2));
}

TEST(GrowthBound, MantissaBoundaryAtDimensionTwo)
{
    EXPECT_EQ(growth_bound(2, 94906266), big_int("9007199136250225"));
    EXPECT_LE(growth_bound(2, 94906266), max_exact_int_big());
    EXPECT_EQ(growth_bound(2, 94906267), big_int("9007199326062756"));
    EXPECT_GT(growth_bound(2, 94906267), max_exact_int_big());
}

TEST(GrowthBound, ExactDivision)
{
    // (p-1) * [p^(N-1) + (p-2)^(N-1)] is even for every p >= 2, N >= 1.
    for (std::int64_t p : {2, 3, 4, 5, 6, 7, 97})
        for (int n = 1; n <= 12; ++n) {
            const unsigned e = static_cast<unsigned>(n - 1);
            big_int bracket = pow(big_int(p), e) + pow(big_int(p - 2), e);
            EXPECT_EQ(big_int(p - 1) * bracket % 2, 0) << "p=" << p << " n=" << n;
        }
}

TEST(Nmax, KnownValues)
{
    EXPECT_EQ(nmax(2), 54);
    EXPECT_EQ(nmax(3), 34);
    EXPECT_EQ(nmax(94906266), 2);
    EXPECT_EQ(nmax(94906267), 1);
    EXPECT_EQ(nmax(208064), 3);
    EXPECT_EQ(nmax(208065), 2);
    EXPECT_THROW(nmax(1), std::domain_error);
    // Once p-1 itself leaves the mantissa range no dimension is safe.
    EXPECT_EQ(nmax(max_exact_int + 1), 0);
    EXPECT_FALSE(delay(1, max_exact_int + 1));
}

TEST(Nmax, LoopAgreesWithClosedForm)
{
    std::vector<std::int64_t> ps = {2, 3, 4, 5, 6, 7, 19, 97, 1553, 9742, 9743, 208064, 208065,
                                    94906266, 94906267};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> pick(2, 2000000);
    for (int i = 0; i < 50; ++i)
        ps.push_back(pick(rng));
    for (std::int64_t p : ps)
        ASSERT_EQ(nmax(p), nmax_by_formula(p)) << "p=" << p;
}

TEST(Nmax, Binary64EvaluationNeverDisagrees)
{
    // The loop's values can round above 2^53, but only at a failing check
    // whose margin dwarfs the rounding error; iteration counts match exact
    // arithmetic everywhere we rely on them.
    std::vector<std::int64_t> ps = {2, 3, 5, 7, 97, 1553, 9742, 9743, 208064, 208065,
                                    94906265, 94906266, 94906267, 94906268};
    for (int n = 2; n <= 54; ++n) {
        ps.push_back(pmax(n));
        ps.push_back(pmax(n) + 1);
    }
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::int64_t> pick(2, 300000);
    for (int i = 0; i < 200; ++i)
        ps.push_back(pick(rng));
    for (std::int64_t p : ps)
        ASSERT_EQ(nmax(p), nmax_binary64(p)) << "p=" << p;
}

TEST(Nmax, NonIncreasingInP)
{
    // Required before pmax may use a monotone search instead of the scan.
    int prev = nmax(2);
    for (std::int64_t p = 3; p <= 5000; ++p) {
        const int cur = nmax(p);
        ASSERT_LE(cur, prev) << "p=" << p;
        prev = cur;
    }
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> pick(2, 94906500);
    for (int i = 0; i < 300; ++i) {
        const std::int64_t p = pick(rng);
        ASSERT_LE(nmax(p + 1), nmax(p)) << "p=" << p;
    }
}

TEST(Pmax, MatchesDefinitionalScan)
{
    for (int n = 5; n <= 54; ++n)
        ASSERT_EQ(pmax(n), pmax_linear_scan(n)) << "n=" << n;
}

TEST(Pmax, ComputedValues)
{
    EXPECT_EQ(pmax(2), 94906266);
    EXPECT_EQ(pmax(3), 208064);
    EXPECT_EQ(pmax(5), 1553);
    EXPECT_EQ(pmax(6), 457);
    EXPECT_EQ(pmax(7), 191);
    EXPECT_EQ(pmax(9), 60);
    EXPECT_EQ(pmax(11), 29);
    EXPECT_EQ(pmax(13), 17);
    EXPECT_EQ(pmax(54), 2);
    EXPECT_EQ(pmax(35), 2);
    EXPECT_EQ(pmax(34), 3);

    // These exceed the published table, which filters by primality on most
    // rows; the predicate itself admits the composite moduli below.
    EXPECT_EQ(pmax(4), 9742);
    EXPECT_EQ(pmax(8), 99);
    EXPECT_EQ(pmax(10), 40);
    EXPECT_EQ(pmax(12), 22);
    EXPECT_EQ(pmax(14), 14);

    EXPECT_THROW(pmax(1), std::domain_error);
    EXPECT_THROW(pmax(55), std::domain_error);
}

TEST(Pmax, NonIncreasingInN)
{
    for (int n = 3; n <= 54; ++n)
        ASSERT_LE(pmax(n), pmax(n - 1)) << "n=" << n;
}

TEST(Pmax, BoundaryIsSharp)
{
    for (int n = 2; n <= 54; ++n) {
        const std::int64_t p = pmax(n);
        ASSERT_TRUE(delay(n, p)) << "n=" << n;
        ASSERT_FALSE(delay(n, p + 1)) << "n=" << n;
    }
}

TEST(Delay, ExamplesAndInterchange)
{
    EXPECT_TRUE(delay(2, 94906266));
    EXPECT_FALSE(delay(2, 94906267));
    EXPECT_FALSE(delay(55, 2));
    EXPECT_TRUE(delay(54, 2));
    EXPECT_TRUE(delay(1, 94906267)); // one row never multiplies

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::int64_t> pick(2, 100000);
    std::uniform_int_distribution<int> dim(2, 54);
    for (int i = 0; i < 2000; ++i) {
        const int n = dim(rng);
        const std::int64_t p = pick(rng);
        ASSERT_EQ(delay(n, p), p <= pmax(n)) << "n=" << n << " p=" << p;
    }
}

TEST(IntervalBounds, TwoRowShape)
{
    for (std::int64_t p : {2, 3, 5, 97}) {
        auto rows = dtrsm_interval_bounds(2, p);
        ASSERT_EQ(rows.size(), 2u);
        EXPECT_EQ(rows[1], (int_interval{big_int(0), big_int(p - 1)}));
        EXPECT_EQ(rows[0], (int_interval{-big_int(p - 1) * (p - 1), big_int(p - 1)}));
    }
}

TEST(IntervalBounds, HandPropagatedThreeRows)
{
    // p = 3: row2 [0,2]; row1 [-4,2]; row0 [-8, 2*(1+4)] = [-8, 10].
    auto rows = dtrsm_interval_bounds(3, 3);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[2], (int_interval{big_int(0), big_int(2)}));
    EXPECT_EQ(rows[1], (int_interval{big_int(-4), big_int(2)}));
    EXPECT_EQ(rows[0], (int_interval{big_int(-8), big_int(10)}));
    EXPECT_EQ(max_interval_magnitude(rows), growth_bound(3, 3));
}

TEST(IntervalBounds, AgreesWithClosedFormEverywhere)
{
    for (int n = 2; n <= 54; ++n)
        for (std::int64_t p : {std::int64_t{2}, std::int64_t{3}, std::int64_t{5}, std::int64_t{7},
                               pmax(n)}) {
            auto rows = dtrsm_interval_bounds(n, p);
            ASSERT_EQ(max_interval_magnitude(rows), growth_bound(n, p))
                << "n=" << n << " p=" << p;
        }
}

TEST(IntervalBounds, WithinMantissaAtPmax)
{
    for (int n = 2; n <= 54; ++n) {
        auto rows = dtrsm_interval_bounds(n, pmax(n));
        ASSERT_LE(max_interval_magnitude(rows), max_exact_int_big()) << "n=" << n;
    }
}

TEST(CutoffCorrectness, GrowthBoundBracketsTheLimit)
{
    // The loop's condition is strict, so growth_bound(nmax(p), p) < 2^53 and
    // growth_bound(nmax(p)+1, p) >= 2^53.  Equality occurs: p = 2 stops at
    // N = 54 precisely because growth_bound(55, 2) = 2^53 exactly.
    std::vector<std::int64_t> ps = {2, 3, 5, 7, 19, 97, 1553, 208064, 94906266};
    for (std::int64_t p : ps) {
        const int n = nmax(p);
        ASSERT_LT(growth_bound(n, p), max_exact_int_big()) << "p=" << p;
        ASSERT_GE(growth_bound(n + 1, p), max_exact_int_big()) << "p=" << p;
    }
    EXPECT_EQ(growth_bound(55, 2), max_exact_int_big());
}

TEST(Mediant, HoldsOnExamples)
{
    EXPECT_TRUE(mediant_step(1, 2, 1, 2, big_rational(1, 2)));
    EXPECT_TRUE(mediant_step(-1, 1, -1, 1, -1)); // equality case: mediant is -1
    EXPECT_FALSE(mediant_step(1, 2, 1, 2, 1));   // e too large: hypotheses fail
    EXPECT_FALSE(mediant_step(1, 2, 1, -3, big_rational(-10))); // b*d < 0
    EXPECT_THROW(mediant_step(1, 0, 1, 2, 0), std::domain_error);
    EXPECT_THROW(mediant_step(1, 2, 1, 0, 0), std::domain_error);
    EXPECT_THROW(mediant_step(1, 2, 1, -2, 0), std::domain_error); // b + d == 0
}

TEST(Mediant, NeverFalsifiedOnRandomRationals)
{
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> num(-60, 60);
    std::uniform_int_distribution<int> den(1, 40);
    int applied = 0;
    for (int i = 0; i < 100000; ++i) {
        const big_rational a(num(rng), den(rng));
        const big_rational c(num(rng), den(rng));
        big_rational b(num(rng), den(rng));
        big_rational d(num(rng), den(rng));
        if (b == 0 || d == 0 || b + d == 0)
            continue;
        const big_rational e = std::min(a / b, c / d) - big_rational(num(rng) & 3, 7);
        // mediant_step throws std::logic_error if the theorem were falsified.
        if (mediant_step(a, b, c, d, e))
            ++applied;
    }
    EXPECT_GT(applied, 10000); // the hypothesis filter must not be vacuous
}

TEST(GemmOutputInterval, Examples)
{
    EXPECT_EQ(gemm_output_interval(3, 2), (std::pair<big_int, big_int>{-8, 2}));
    EXPECT_EQ(gemm_output_interval(2, 1), (std::pair<big_int, big_int>{-1, 1}));
}

TEST(GemmOutputInterval, WithinMantissaWhenPreconditionHolds)
{
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<std::int64_t> pick_p(2, 94906266);
    std::uniform_int_distribution<int> pick_m(1, 64);
    for (int i = 0; i < 1000; ++i) {
        const std::int64_t p = pick_p(rng);
        const int m = pick_m(rng);
        if (big_int(p - 1) * (p - 1) * m > max_exact_int_big())
            continue;
        const auto [lo, hi] = gemm_output_interval(p, m);
        ASSERT_LE(-lo, max_exact_int_big());
        ASSERT_LE(hi, max_exact_int_big());
    }
}
