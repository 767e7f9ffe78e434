#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ffdelay/gappa.hpp"
#include "ffdelay/oracle.hpp"

using namespace ffdelay;

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST(ExactnessScript, SmallestCaseText)
{
    exactness_script s = emit_exactness_script(record_dtrsm_trace(2, 1), 94906266);
    EXPECT_NE(s.text.find("t0 = A0_1 * X1_0;"), std::string::npos);
    EXPECT_NE(s.text.find("t1 = X0_0 - t0;"), std::string::npos);
    EXPECT_NE(s.text.find("A0_1 in [0,94906265] ->"), std::string::npos);
    EXPECT_NE(s.text.find("t0 in [-1b53,1b53] /\\"), std::string::npos);
    EXPECT_NE(s.text.find("t1 in [-1b53,1b53] }"), std::string::npos);
}

TEST(ExactnessScript, SelfCheckPassesAtTheBoundaryModulus)
{
    exactness_script s = emit_exactness_script(record_dtrsm_trace(2, 1), 94906266);
    check_result r = self_check(s);
    EXPECT_TRUE(r.ok);
    ASSERT_EQ(r.goals.size(), 2u);
    EXPECT_TRUE(r.goals[0].verified);
    EXPECT_TRUE(r.goals[1].verified);
}

TEST(ExactnessScript, SelfCheckFailsOnePastTheBoundary)
{
    exactness_script s = emit_exactness_script(record_dtrsm_trace(2, 1), 94906267);
    check_result r = self_check(s);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.first_failed, 0); // the product already leaves [-2^53, 2^53]
    EXPECT_FALSE(r.goals[0].verified);
}

TEST(ExactnessScript, ModulusTwoPassesAtEveryDimension)
{
    for (int n : {2, 10, 34, 54}) {
        exactness_script s = emit_exactness_script(record_dtrsm_trace(n, 1), 2);
        EXPECT_TRUE(self_check(s).ok) << "n=" << n;
    }
}

TEST(ExactnessScript, MonotoneCoverageInP)
{
    // A goal interval computed at pmax(N) covers every smaller modulus.
    for (int n : {5, 9, 16}) {
        const std::int64_t top = pmax(n);
        ASSERT_TRUE(self_check(emit_exactness_script(record_dtrsm_trace(n, 1), top)).ok);
        for (std::int64_t p : {std::int64_t{2}, std::int64_t{3}, std::int64_t{7}})
            EXPECT_TRUE(self_check(emit_exactness_script(record_dtrsm_trace(n, 1), p)).ok)
                << "n=" << n << " p=" << p;
    }
}

TEST(ExactnessScript, EmptyTraceIsVacuouslyTrue)
{
    dtrsm_trace empty;
    empty.n = 1;
    empty.k = 1;
    exactness_script s = emit_exactness_script(empty, 5);
    check_result r = self_check(s);
    EXPECT_TRUE(r.ok);
    EXPECT_TRUE(r.goals.empty());
}

TEST(ExactnessScript, IntervalMatchesWorstCasePropagation)
{
    // The checker's per-op ranges re-derive the row intervals: the script
    // fails exactly when the closed-form bound leaves the mantissa range.
    for (auto [n, p] : {std::pair<int, std::int64_t>{3, 208064}, {3, 208065}, {4, 9742},
                        {4, 9743}}) {
        exactness_script s = emit_exactness_script(record_dtrsm_trace(n, 1), p);
        EXPECT_EQ(self_check(s).ok, growth_bound(n, p) <= max_exact_int_big())
            << "n=" << n << " p=" << p;
    }
}

TEST(ExactnessScript, CheckerIntervalsMatchHandPropagation)
{
    // N = 3, p = 3: t0 = A1_2*X2_0 in [0,4]; t1 = X1_0-t0 in [-4,2];
    // t2 = A0_1*t1 in [-8,4]; t3 = X0_0-t2 in [-4,10]; t4 = A0_2*X2_0 in
    // [0,4]; t5 = t3-t4 in [-8,10].
    exactness_script s = emit_exactness_script(record_dtrsm_trace(3, 1), 3);
    check_result r = self_check(s);
    ASSERT_EQ(r.goals.size(), 6u);
    const char* expected[] = {"interval [0, 4]",  "interval [-4, 2]", "interval [-8, 4]",
                              "interval [-4, 10]", "interval [0, 4]",  "interval [-8, 10]"};
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_EQ(r.goals[i].method, expected[i]) << "t" << i;
}

TEST(ExactnessScript, OpRangesAgreeWithRowIntervalPropagation)
{
    // Two independent propagations of the same worst case: per-operation
    // ranges over the unrolled trace versus per-row interval bounds.  The
    // peak magnitudes must coincide (and both equal the closed form).
    for (int n : {2, 4, 9, 17, 31}) {
        for (std::int64_t p : {std::int64_t{3}, pmax(n)}) {
            exactness_script s = emit_exactness_script(record_dtrsm_trace(n, 1), p);
            big_int peak = 0;
            for (const int_interval& r : exactness_op_ranges(s)) {
                if (r.hi > peak)
                    peak = r.hi;
                if (-r.lo > peak)
                    peak = -r.lo;
            }
            ASSERT_EQ(peak, max_interval_magnitude(dtrsm_interval_bounds(n, p)))
                << "n=" << n << " p=" << p;
            ASSERT_EQ(peak, growth_bound(n, p)) << "n=" << n << " p=" << p;
        }
    }
}

TEST(InductionScript, CheckerRefusesAStrengthenedGoal)
{
    // Tighten the second goal's bound to >= 0 (its true range is [-1, 0]):
    // the checker must refuse it, and without the goal-2 fact the mediant
    // step cannot close goal 3 either.
    induction_script s = emit_gemm_induction_script();
    s.goals[1].lo = big_rational(0);
    check_result r = self_check(s);
    EXPECT_FALSE(r.ok);
    EXPECT_TRUE(r.goals[0].verified);
    EXPECT_FALSE(r.goals[1].verified);
    EXPECT_FALSE(r.goals[2].verified);
    EXPECT_EQ(r.first_failed, 1);
}

TEST(InductionScript, ContainsTheListingVerbatimStructure)
{
    induction_script s = emit_gemm_induction_script();
    EXPECT_NE(s.text.find("p in [2,1b53]"), std::string::npos);
    EXPECT_NE(s.text.find("j in [1,1b53]"), std::string::npos);
    EXPECT_NE(s.text.find("oYik in [-1b53,1b53]"), std::string::npos);
    EXPECT_NE(s.text.find("Aij/(p-1) in [0,1]"), std::string::npos);
    EXPECT_NE(s.text.find("Xjk/(p-1) in [0,1]"), std::string::npos);
    EXPECT_NE(s.text.find("oYik / ((p-1)*(p-1)*j) >= -1"), std::string::npos);
    // Three goal conjuncts.
    EXPECT_NE(s.text.find("((p-1)*(p-1)*j) * ((p-1)*(p-1)) >= 0"), std::string::npos);
    EXPECT_NE(s.text.find("-Aij*Xjk / ((p-1)*(p-1)) >= -1"), std::string::npos);
    EXPECT_NE(s.text.find("(oYik - Aij*Xjk) / ((p-1)*(p-1)*(j+1)) >= -1"), std::string::npos);
    // Both rewrite hints with their nonzero side conditions.
    EXPECT_NE(s.text.find("- (Aij/(p-1)) * (Xjk/(p-1)) { (p-1) <> 0 };"), std::string::npos);
    EXPECT_NE(s.text.find("(oYik + (- Aij*Xjk)) / (((p-1)*(p-1)*j) + ((p-1)*(p-1)))"),
              std::string::npos);
    EXPECT_NE(s.text.find("{ ((p-1)*(p-1)*(j+1)) <> 0 , ((p-1)*(p-1)*j) * ((p-1)*(p-1)) <> 0 };"),
              std::string::npos);
    EXPECT_EQ(s.goals.size(), 3u);
    EXPECT_EQ(s.hypotheses.size(), 6u);
    EXPECT_EQ(s.hints.size(), 2u);
}

TEST(InductionScript, SelfCheckClosesAllThreeGoals)
{
    induction_script s = emit_gemm_induction_script();
    check_result r = self_check(s);
    ASSERT_EQ(r.goals.size(), 3u);
    EXPECT_TRUE(r.ok) << (r.first_failed >= 0 ? r.goals[static_cast<std::size_t>(r.first_failed)].goal
                                              : "");
    EXPECT_TRUE(r.goals[0].verified);
    EXPECT_TRUE(r.goals[1].verified);
    EXPECT_TRUE(r.goals[2].verified);
    // The last conjunct is out of interval propagation's reach; only the
    // mediant rule closes it.
    EXPECT_NE(r.goals[2].method.find("mediant"), std::string::npos);
}

TEST(CaseSuite, EmitsFiftyThreePlusInduction)
{
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "ffdelay_case_suite_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    std::vector<emitted_file> files = emit_case_suite(dir);
    ASSERT_EQ(files.size(), 54u);
    int scripts = 0;
    for (const auto& f : files) {
        EXPECT_TRUE(f.written) << f.filename << ": " << f.error;
        EXPECT_TRUE(f.self_check_ok) << f.filename;
        if (f.filename.rfind("dtrsm_N", 0) == 0)
            ++scripts;
    }
    EXPECT_EQ(scripts, 53);
    EXPECT_EQ(files.back().filename, "gemm_induction.g");

    // Per-dimension scripts bind the largest admissible modulus.
    const std::string n12 = slurp(dir / "dtrsm_N12.g");
    EXPECT_NE(n12.find("in [0," + std::to_string(pmax(12) - 1) + "]"), std::string::npos);
    const std::string n35 = slurp(dir / "dtrsm_N35.g");
    EXPECT_NE(n35.find("in [0,1]"), std::string::npos); // pmax(35) = 2
    const std::string n54 = slurp(dir / "dtrsm_N54.g");
    EXPECT_NE(n54.find("t2861"), std::string::npos);

    std::filesystem::remove_all(dir);
}

TEST(CaseSuite, ReportsWriteFailuresPerFileAndContinues)
{
    // Point the suite at a path that is a file, not a directory: every
    // write fails, every entry reports it, and the enumeration still
    // produces all 54 entries with their self-check verdicts.
    const std::filesystem::path bogus =
        std::filesystem::temp_directory_path() / "ffdelay_not_a_directory";
    std::filesystem::remove_all(bogus);
    {
        std::ofstream touch(bogus);
        touch << "occupied\n";
    }
    std::vector<emitted_file> files = emit_case_suite(bogus);
    ASSERT_EQ(files.size(), 54u);
    for (const auto& f : files) {
        EXPECT_FALSE(f.written) << f.filename;
        EXPECT_FALSE(f.error.empty()) << f.filename;
        EXPECT_TRUE(f.self_check_ok) << f.filename; // checking is independent of I/O
    }
    std::filesystem::remove_all(bogus);
}

TEST(CaseSuite, SelfCheckAgreesWithShadowCertification)
{
    // Wherever the script suite verifies (N, p), randomized runs at that
    // (N, p) must certify.
    std::mt19937_64 rng(401);
    for (int n : {2, 6, 13, 29}) {
        const std::int64_t p = pmax(n);
        ASSERT_TRUE(self_check(emit_exactness_script(record_dtrsm_trace(n, 1), p)).ok);
        for (int trial = 0; trial < 5; ++trial) {
            solve_instance inst = random_unit_upper_instance(rng, n, 1, p);
            fp_matrix x = inst.b;
            ASSERT_TRUE(shadow_dtrsm(inst.a.view(), x.view()).certified())
                << "n=" << n << " trial=" << trial;
        }
    }
}
