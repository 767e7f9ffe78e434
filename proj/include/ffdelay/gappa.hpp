#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ffdelay/bigint.hpp"
#include "ffdelay/bounds.hpp"
#include "ffdelay/error.hpp"
#include "ffdelay/trace.hpp"

namespace ffdelay {

struct goal_report {
    std::string goal;
    bool verified = false;
    std::string method; // computed interval, or the rule that closed the goal
};

struct check_result {
    bool ok = true;
    int first_failed = -1;
    std::vector<goal_report> goals;
};

// --- per-N exactness scripts -------------------------------------------------

/// Proof-obligation script for one unrolled solve: hypotheses put every input
/// symbol in [0, p-1]; one goal per recorded operation states that its result
/// lies in [-1b53, 1b53], i.e. the exact integer value is representable and
/// the operation cannot round.
struct exactness_script {
    int n = 0;
    int k = 0;
    std::int64_t p = 0;
    dtrsm_trace trace;
    std::string text;
};

inline exactness_script emit_exactness_script(const dtrsm_trace& trace, std::int64_t p)
{
    if (p < 2)
        throw std::domain_error("emit_exactness_script: need p >= 2");
    exactness_script script;
    script.n = trace.n;
    script.k = trace.k;
    script.p = p;
    script.trace = trace;

    std::ostringstream out;
    out << "# Exactness obligations for the unreduced unit-triangular solve,"
        << " N = " << trace.n << ", K = " << trace.k << ", p = " << p << ".\n";
    out << "# Every intermediate below is an integer; the goals bound each one"
        << " within the binary64 mantissa range.\n";
    auto ref_name = [&trace](const operand_ref& r) {
        return r.from == operand_ref::source::input
                   ? trace.input_names[static_cast<std::size_t>(r.index)]
                   : "t" + std::to_string(r.index);
    };
    for (std::size_t id = 0; id < trace.ops.size(); ++id) {
        const op_record& op = trace.ops[id];
        out << 't' << id << " = " << ref_name(op.lhs)
            << (op.kind == op_kind::mul ? " * " : " - ") << ref_name(op.rhs) << ";\n";
    }
    out << "{ ";
    for (std::size_t s = 0; s < trace.input_names.size(); ++s) {
        if (s)
            out << "  ";
        out << trace.input_names[s] << " in [0," << (p - 1) << "] ->\n";
    }
    for (std::size_t id = 0; id < trace.ops.size(); ++id) {
        out << "  t" << id << " in [-1b53,1b53]";
        out << (id + 1 < trace.ops.size() ? " /\\\n" : " }\n");
    }
    if (trace.ops.empty())
        out << "}\n";
    script.text = out.str();
    return script;
}

/// Exact integer range of every recorded operation under the hypothesis
/// that each input lies in [0, p-1], in operation order.
inline std::vector<int_interval> exactness_op_ranges(const exactness_script& script)
{
    const dtrsm_trace& trace = script.trace;
    const int_interval input_range{big_int(0), big_int(script.p - 1)};
    std::vector<int_interval> op_range;
    op_range.reserve(trace.ops.size());
    auto range_of = [&](const operand_ref& r) -> const int_interval& {
        return r.from == operand_ref::source::input ? input_range
                                                    : op_range[static_cast<std::size_t>(r.index)];
    };
    for (const op_record& op : trace.ops) {
        const int_interval& a = range_of(op.lhs);
        const int_interval& b = range_of(op.rhs);
        int_interval r;
        if (op.kind == op_kind::mul) {
            const big_int c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
            r.lo = std::min(std::min(c1, c2), std::min(c3, c4));
            r.hi = std::max(std::max(c1, c2), std::max(c3, c4));
        } else {
            r.lo = a.lo - b.hi;
            r.hi = a.hi - b.lo;
        }
        op_range.push_back(std::move(r));
    }
    return op_range;
}

/// Exact integer interval propagation over the recorded operations; a goal
/// holds iff the propagated interval stays within [-2^53, 2^53].
inline check_result self_check(const exactness_script& script)
{
    const big_int limit = max_exact_int_big();
    const std::vector<int_interval> ranges = exactness_op_ranges(script);
    check_result result;
    result.goals.reserve(ranges.size());
    for (std::size_t id = 0; id < ranges.size(); ++id) {
        const int_interval& r = ranges[id];
        const bool ok = -limit <= r.lo && r.hi <= limit;
        goal_report rep;
        rep.goal = "t" + std::to_string(id) + " in [-1b53,1b53]";
        rep.verified = ok;
        std::ostringstream m;
        m << "interval [" << r.lo << ", " << r.hi << "]";
        rep.method = m.str();
        if (!ok && result.first_failed < 0)
            result.first_failed = static_cast<int>(id);
        result.ok = result.ok && ok;
        result.goals.push_back(std::move(rep));
    }
    return result;
}

// --- generic-case induction script -------------------------------------------

namespace detail {

struct rexpr {
    enum class kind { var, constant, add, sub, mul, div, neg };
    kind k = kind::var;
    int a = -1;
    int b = -1;
    big_rational value;
    std::string name;
};

class rexpr_pool {
public:
    int var(std::string name)
    {
        rexpr e;
        e.k = rexpr::kind::var;
        e.name = std::move(name);
        nodes_.push_back(std::move(e));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int constant(big_rational v)
    {
        rexpr e;
        e.k = rexpr::kind::constant;
        e.value = std::move(v);
        nodes_.push_back(std::move(e));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int node(rexpr::kind k, int a, int b = -1)
    {
        rexpr e;
        e.k = k;
        e.a = a;
        e.b = b;
        nodes_.push_back(std::move(e));
        return static_cast<int>(nodes_.size()) - 1;
    }

    int add(int a, int b) { return node(rexpr::kind::add, a, b); }
    int sub(int a, int b) { return node(rexpr::kind::sub, a, b); }
    int mul(int a, int b) { return node(rexpr::kind::mul, a, b); }
    int div(int a, int b) { return node(rexpr::kind::div, a, b); }
    int neg(int a) { return node(rexpr::kind::neg, a); }

    int find_div(int a, int b) const
    {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].k == rexpr::kind::div && nodes_[i].a == a && nodes_[i].b == b)
                return static_cast<int>(i);
        return -1;
    }

    const rexpr& operator[](int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    int size() const { return static_cast<int>(nodes_.size()); }

private:
    std::vector<rexpr> nodes_;
};

struct rat_interval {
    std::optional<big_rational> lo;
    std::optional<big_rational> hi;

    bool excludes_zero() const { return (lo && *lo > 0) || (hi && *hi < 0); }
    bool strictly_positive() const { return lo && *lo > 0; }
    bool strictly_negative() const { return hi && *hi < 0; }
};

inline rat_interval intersect(const rat_interval& a, const rat_interval& b)
{
    rat_interval r = a;
    if (b.lo && (!r.lo || *b.lo > *r.lo))
        r.lo = b.lo;
    if (b.hi && (!r.hi || *b.hi < *r.hi))
        r.hi = b.hi;
    return r;
}

} // namespace detail

/// One range statement: expression `node` lies in [lo, hi] (either bound may
/// be absent; ">= c" carries only a lower bound).
struct range_statement {
    int node = -1;
    std::optional<big_rational> lo;
    std::optional<big_rational> hi;
    std::string text;
};

struct rewrite_hint {
    int from = -1;
    int to = -1;
    std::vector<int> nonzero_conditions;
};

/// The generic induction-step obligation of the negated product's loop
/// assertion, with its two rewrite hints.  Goal three is out of reach of
/// plain interval propagation; it follows from the mediant inequality
///     e <= a/b  /\  e <= c/d  /\  0 < b*d   ==>   e <= (a+c)/(b+d)
/// applied to the hinted right-hand side, which is how the self-check
/// closes it.
struct induction_script {
    std::string text;
    detail::rexpr_pool pool;
    std::vector<range_statement> hypotheses;
    std::vector<range_statement> goals;
    std::vector<rewrite_hint> hints;
};

inline induction_script emit_gemm_induction_script()
{
    induction_script script;
    script.text =
        "{\n"
        "  p in [2,1b53]                                ->\n"
        "  j in [1,1b53]                                ->\n"
        "  oYik in [-1b53,1b53]                         ->\n"
        "  Aij/(p-1) in [0,1]                           ->\n"
        "  Xjk/(p-1) in [0,1]                           ->\n"
        "  oYik / ((p-1)*(p-1)*j) >= -1                 ->\n"
        "  ((p-1)*(p-1)*j) * ((p-1)*(p-1)) >= 0         /\\\n"
        "  -Aij*Xjk / ((p-1)*(p-1)) >= -1               /\\\n"
        "  (oYik - Aij*Xjk) / ((p-1)*(p-1)*(j+1)) >= -1\n"
        "}\n"
        "-Aij*Xjk / ((p-1)*(p-1)) ->\n"
        "  - (Aij/(p-1)) * (Xjk/(p-1)) { (p-1) <> 0 };\n"
        "(oYik - Aij*Xjk) / ((p-1)*(p-1)*(j+1)) ->\n"
        "  (oYik + (- Aij*Xjk)) / (((p-1)*(p-1)*j) + ((p-1)*(p-1)))\n"
        "  { ((p-1)*(p-1)*(j+1)) <> 0 , ((p-1)*(p-1)*j) * ((p-1)*(p-1)) <> 0 };\n";

    // Structured model mirroring the text above, with shared subexpressions.
    auto& pool = script.pool;
    const int p = pool.var("p");
    const int j = pool.var("j");
    const int oyik = pool.var("oYik");
    const int aij = pool.var("Aij");
    const int xjk = pool.var("Xjk");
    const int one = pool.constant(big_rational(1));
    const int pm1 = pool.sub(p, one);
    const int psq = pool.mul(pm1, pm1);
    const int psq_j = pool.mul(psq, j);
    const int jp1 = pool.add(j, one);
    const int psq_jp1 = pool.mul(psq, jp1);
    const int prod = pool.mul(aij, xjk);
    const int neg_prod = pool.neg(prod);
    const int aij_scaled = pool.div(aij, pm1);
    const int xjk_scaled = pool.div(xjk, pm1);
    const int hyp6_quot = pool.div(oyik, psq_j);

    const big_rational big53(max_exact_int);
    auto in_range = [&](int node, big_rational lo, big_rational hi, std::string text) {
        return range_statement{node, std::move(lo), std::move(hi), std::move(text)};
    };
    auto at_least = [&](int node, big_rational lo, std::string text) {
        return range_statement{node, std::move(lo), std::nullopt, std::move(text)};
    };

    script.hypotheses.push_back(in_range(p, big_rational(2), big53, "p in [2,1b53]"));
    script.hypotheses.push_back(in_range(j, big_rational(1), big53, "j in [1,1b53]"));
    script.hypotheses.push_back(in_range(oyik, -big53, big53, "oYik in [-1b53,1b53]"));
    script.hypotheses.push_back(
        in_range(aij_scaled, big_rational(0), big_rational(1), "Aij/(p-1) in [0,1]"));
    script.hypotheses.push_back(
        in_range(xjk_scaled, big_rational(0), big_rational(1), "Xjk/(p-1) in [0,1]"));
    script.hypotheses.push_back(
        at_least(hyp6_quot, big_rational(-1), "oYik / ((p-1)*(p-1)*j) >= -1"));

    const int goal1 = pool.mul(psq_j, psq);
    const int goal2 = pool.div(neg_prod, psq);
    const int goal3 = pool.div(pool.sub(oyik, prod), psq_jp1);
    script.goals.push_back(
        at_least(goal1, big_rational(0), "((p-1)*(p-1)*j) * ((p-1)*(p-1)) >= 0"));
    script.goals.push_back(at_least(goal2, big_rational(-1), "-Aij*Xjk / ((p-1)*(p-1)) >= -1"));
    script.goals.push_back(
        at_least(goal3, big_rational(-1), "(oYik - Aij*Xjk) / ((p-1)*(p-1)*(j+1)) >= -1"));

    const int rw1_to = pool.mul(pool.neg(aij_scaled), xjk_scaled);
    script.hints.push_back({goal2, rw1_to, {pm1}});
    const int rw2_to = pool.div(pool.add(oyik, neg_prod), pool.add(psq_j, psq));
    script.hints.push_back({goal3, rw2_to, {psq_jp1, goal1}});
    return script;
}

namespace detail {

class induction_checker {
public:
    explicit induction_checker(const induction_script& script) : script_(script)
    {
        for (const auto& h : script.hypotheses)
            add_fact(h.node, {h.lo, h.hi});
    }

    check_result run()
    {
        check_result result;
        int index = 0;
        for (const auto& goal : script_.goals) {
            goal_report rep;
            rep.goal = goal.text;
            rat_interval iv = eval(goal.node, /*allow_rewrite=*/true);
            if (satisfies(iv, goal)) {
                rep.verified = true;
                rep.method = "interval " + show(iv);
            } else if (mediant_closes(goal)) {
                rep.verified = true;
                rep.method = "mediant rule on the hinted right-hand side";
            } else {
                rep.verified = false;
                rep.method = "interval " + show(iv) + " does not imply the bound";
            }
            if (rep.verified)
                add_fact(goal.node, {goal.lo, goal.hi});
            else if (result.first_failed < 0)
                result.first_failed = index;
            result.ok = result.ok && rep.verified;
            result.goals.push_back(std::move(rep));
            ++index;
        }
        return result;
    }

private:
    const induction_script& script_;
    std::map<int, rat_interval> facts_;

    void add_fact(int node, rat_interval iv)
    {
        auto it = facts_.find(node);
        if (it == facts_.end())
            facts_.emplace(node, std::move(iv));
        else
            it->second = intersect(it->second, iv);
    }

    static bool satisfies(const rat_interval& iv, const range_statement& goal)
    {
        if (goal.lo && (!iv.lo || *iv.lo < *goal.lo))
            return false;
        if (goal.hi && (!iv.hi || *iv.hi > *goal.hi))
            return false;
        return true;
    }

    const rewrite_hint* hint_for(int node) const
    {
        for (const auto& h : script_.hints)
            if (h.from == node)
                return &h;
        return nullptr;
    }

    bool conditions_hold(const rewrite_hint& hint)
    {
        for (int cond : hint.nonzero_conditions)
            if (!eval(cond, /*allow_rewrite=*/false).excludes_zero())
                return false;
        return true;
    }

    rat_interval eval(int id, bool allow_rewrite)
    {
        rat_interval known;
        if (auto it = facts_.find(id); it != facts_.end())
            known = it->second;
        return intersect(known, eval_structural(id, allow_rewrite));
    }

    rat_interval eval_structural(int id, bool allow_rewrite)
    {
        if (allow_rewrite)
            if (const rewrite_hint* hint = hint_for(id); hint && conditions_hold(*hint))
                return eval(hint->to, /*allow_rewrite=*/false);
        const rexpr& e = script_.pool[id];
        switch (e.k) {
        case rexpr::kind::var:
            return {};
        case rexpr::kind::constant:
            return {e.value, e.value};
        case rexpr::kind::neg: {
            rat_interval a = eval(e.a, allow_rewrite);
            rat_interval r;
            if (a.hi)
                r.lo = -*a.hi;
            if (a.lo)
                r.hi = -*a.lo;
            return r;
        }
        case rexpr::kind::add: {
            rat_interval a = eval(e.a, allow_rewrite), b = eval(e.b, allow_rewrite);
            rat_interval r;
            if (a.lo && b.lo)
                r.lo = *a.lo + *b.lo;
            if (a.hi && b.hi)
                r.hi = *a.hi + *b.hi;
            return r;
        }
        case rexpr::kind::sub: {
            rat_interval a = eval(e.a, allow_rewrite), b = eval(e.b, allow_rewrite);
            rat_interval r;
            if (a.lo && b.hi)
                r.lo = *a.lo - *b.hi;
            if (a.hi && b.lo)
                r.hi = *a.hi - *b.lo;
            return r;
        }
        case rexpr::kind::mul: {
            rat_interval a = eval(e.a, allow_rewrite), b = eval(e.b, allow_rewrite);
            if (!(a.lo && a.hi && b.lo && b.hi))
                return {};
            const big_rational c1 = *a.lo * *b.lo, c2 = *a.lo * *b.hi, c3 = *a.hi * *b.lo,
                               c4 = *a.hi * *b.hi;
            return {std::min(std::min(c1, c2), std::min(c3, c4)),
                    std::max(std::max(c1, c2), std::max(c3, c4))};
        }
        case rexpr::kind::div: {
            rat_interval a = eval(e.a, allow_rewrite), b = eval(e.b, allow_rewrite);
            if (!(a.lo && a.hi && b.lo && b.hi) || !b.excludes_zero())
                return {};
            const big_rational c1 = *a.lo / *b.lo, c2 = *a.lo / *b.hi, c3 = *a.hi / *b.lo,
                               c4 = *a.hi / *b.hi;
            return {std::min(std::min(c1, c2), std::min(c3, c4)),
                    std::max(std::max(c1, c2), std::max(c3, c4))};
        }
        }
        return {};
    }

    /// Closes a one-sided goal "q >= e" when the (possibly rewritten) q has
    /// the shape (a + c) / (b + d) with known facts a/b >= e and c/d >= e and
    /// strictly signed b, d with b*d > 0.
    bool mediant_closes(const range_statement& goal)
    {
        if (!goal.lo || goal.hi)
            return false;
        int target = goal.node;
        if (const rewrite_hint* hint = hint_for(goal.node); hint && conditions_hold(*hint))
            target = hint->to;
        const rexpr& q = script_.pool[target];
        if (q.k != rexpr::kind::div)
            return false;
        const rexpr& num = script_.pool[q.a];
        const rexpr& den = script_.pool[q.b];
        if (num.k != rexpr::kind::add || den.k != rexpr::kind::add)
            return false;
        const int a = num.a, c = num.b, b = den.a, d = den.b;
        const int left = script_.pool.find_div(a, b);
        const int right = script_.pool.find_div(c, d);
        if (left < 0 || right < 0)
            return false;
        rat_interval la = eval(left, /*allow_rewrite=*/false);
        rat_interval rc = eval(right, /*allow_rewrite=*/false);
        if (!la.lo || *la.lo < *goal.lo || !rc.lo || *rc.lo < *goal.lo)
            return false;
        rat_interval ib = eval(b, /*allow_rewrite=*/false);
        rat_interval id = eval(d, /*allow_rewrite=*/false);
        const bool bd_positive = (ib.strictly_positive() && id.strictly_positive()) ||
                                 (ib.strictly_negative() && id.strictly_negative());
        return bd_positive;
    }

    static std::string show(const rat_interval& iv)
    {
        std::ostringstream out;
        out << '[';
        if (iv.lo)
            out << *iv.lo;
        else
            out << "-inf";
        out << ", ";
        if (iv.hi)
            out << *iv.hi;
        else
            out << "+inf";
        out << ']';
        return out.str();
    }
};

} // namespace detail

inline check_result self_check(const induction_script& script)
{
    return detail::induction_checker(script).run();
}

// --- whole-suite emission -----------------------------------------------------

struct emitted_file {
    std::string filename;
    bool written = false;
    bool self_check_ok = false;
    int goal_count = 0;
    std::string error;
};

/// Emits one exactness script per dimension N in [2, 54] at the largest
/// admissible modulus pmax(N) (one right-hand-side column: columns are
/// independent, so one column's obligations cover any K), plus the generic
/// induction-step script.  I/O failures are reported per file and do not
/// stop the enumeration.
inline std::vector<emitted_file> emit_case_suite(const std::filesystem::path& out_dir)
{
    std::vector<emitted_file> results;
    for (int n = 2; n <= 54; ++n) {
        emitted_file entry;
        std::ostringstream name;
        name << "dtrsm_N" << (n < 10 ? "0" : "") << n << ".g";
        entry.filename = name.str();
        try {
            const exactness_script script =
                emit_exactness_script(record_dtrsm_trace(n, 1), pmax_table()[static_cast<std::size_t>(n)]);
            const check_result check = self_check(script);
            entry.self_check_ok = check.ok;
            entry.goal_count = static_cast<int>(check.goals.size());
            std::ofstream out(out_dir / entry.filename);
            out << script.text;
            entry.written = static_cast<bool>(out);
            if (!entry.written)
                entry.error = "write failed";
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        results.push_back(std::move(entry));
    }
    emitted_file induction;
    induction.filename = "gemm_induction.g";
    try {
        const induction_script script = emit_gemm_induction_script();
        const check_result check = self_check(script);
        induction.self_check_ok = check.ok;
        induction.goal_count = static_cast<int>(check.goals.size());
        std::ofstream out(out_dir / induction.filename);
        out << script.text;
        induction.written = static_cast<bool>(out);
        if (!induction.written)
            induction.error = "write failed";
    } catch (const std::exception& e) {
        induction.error = e.what();
    }
    results.push_back(std::move(induction));
    return results;
}

} // namespace ffdelay
