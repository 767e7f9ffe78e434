#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffdelay/error.hpp"
#include "ffdelay/kernels.hpp"
#include "ffdelay/matrix.hpp"

namespace ffdelay {

/// Reference to an input symbol or to the result of an earlier operation.
struct operand_ref {
    enum class source : std::uint8_t { input, op };
    source from = source::input;
    int index = -1;

    friend bool operator==(const operand_ref&, const operand_ref&) = default;
};

struct op_record {
    op_kind kind = op_kind::mul;
    operand_ref lhs;
    operand_ref rhs;
    op_site site;
};

/// Straight-line unrolling of the unreduced solver after instantiating
/// (N, K): no branches, only multiply and subtract records in execution
/// order.  Reassigned cells are tracked in single-assignment form, so every
/// operand names either an input symbol or the latest defining operation;
/// final_x holds the defining reference of each solution cell, row-major.
struct dtrsm_trace {
    int n = 0;
    int k = 0;
    std::vector<std::string> input_names;
    std::vector<op_record> ops;
    std::vector<operand_ref> final_x;
};

namespace detail {

struct sym_scalar {
    operand_ref ref;
    dtrsm_trace* trace = nullptr;
};

inline dtrsm_trace* sym_ctx(const sym_scalar& a, const sym_scalar& b)
{
    return a.trace ? a.trace : b.trace;
}

inline sym_scalar sym_append(dtrsm_trace* t, op_kind kind, const sym_scalar& a,
                             const sym_scalar& b, op_site site)
{
    if (!t)
        throw contract_error("trace recording: operands carry no trace context");
    if (a.ref.index < 0 || b.ref.index < 0)
        throw contract_error("trace recording: undefined operand read");
    t->ops.push_back({kind, a.ref, b.ref, site});
    return {{operand_ref::source::op, static_cast<int>(t->ops.size()) - 1}, t};
}

} // namespace detail

template <>
struct scalar_ops<detail::sym_scalar> {
    static constexpr bool has_value = false;

    static detail::sym_scalar mul(const detail::sym_scalar& a, const detail::sym_scalar& b,
                                  op_site site)
    {
        return detail::sym_append(detail::sym_ctx(a, b), op_kind::mul, a, b, site);
    }

    static detail::sym_scalar sub(const detail::sym_scalar& a, const detail::sym_scalar& b,
                                  op_site site)
    {
        return detail::sym_append(detail::sym_ctx(a, b), op_kind::sub, a, b, site);
    }
};

/// Unrolls the unreduced solver at dimension N with K right-hand-side
/// columns.  Pure function of (N, K): two invocations record identical
/// traces.  Inputs are the strictly upper entries A<i>_<j> and the cells
/// X<i>_<k>.
inline dtrsm_trace record_dtrsm_trace(int n, int k)
{
    if (n < 2 || n > 54)
        throw std::domain_error("record_dtrsm_trace: N must lie in [2, 54]");
    if (k < 1)
        throw std::domain_error("record_dtrsm_trace: K must be at least 1");
    dtrsm_trace trace;
    trace.n = n;
    trace.k = k;

    auto add_input = [&trace](std::string name) {
        trace.input_names.push_back(std::move(name));
        return operand_ref{operand_ref::source::input,
                           static_cast<int>(trace.input_names.size()) - 1};
    };

    matrix<detail::sym_scalar> a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            a(i, j) = {add_input("A" + std::to_string(i) + "_" + std::to_string(j)), &trace};
    matrix<detail::sym_scalar> x(n, k);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            x(i, c) = {add_input("X" + std::to_string(i) + "_" + std::to_string(c)), &trace};

    dtrsm<detail::sym_scalar>(a.view(), x.view());

    trace.final_x.reserve(static_cast<std::size_t>(n) * k);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            trace.final_x.push_back(x(i, c).ref);
    return trace;
}

/// Evaluates a recorded trace on concrete inputs with plain binary64
/// arithmetic; returns the solution matrix assembled from final_x.
inline fp_matrix eval_trace(const dtrsm_trace& trace, const std::vector<double>& inputs)
{
    if (inputs.size() != trace.input_names.size())
        throw contract_error("eval_trace: expected " + std::to_string(trace.input_names.size()) +
                             " input values");
    std::vector<double> values;
    values.reserve(trace.ops.size());
    auto value_of = [&](const operand_ref& r) {
        return r.from == operand_ref::source::input ? inputs[static_cast<std::size_t>(r.index)]
                                                    : values[static_cast<std::size_t>(r.index)];
    };
    for (const auto& op : trace.ops) {
        const double a = value_of(op.lhs);
        const double b = value_of(op.rhs);
        values.push_back(op.kind == op_kind::mul ? a * b : a - b);
    }
    fp_matrix out(trace.n, trace.k);
    std::size_t idx = 0;
    for (int i = 0; i < trace.n; ++i)
        for (int c = 0; c < trace.k; ++c)
            out(i, c) = value_of(trace.final_x[idx++]);
    return out;
}

/// Input vector for eval_trace matching record_dtrsm_trace's symbol order.
inline std::vector<double> trace_inputs_from(matrix_view<const double> a,
                                             matrix_view<const double> x)
{
    std::vector<double> inputs;
    const int n = a.rows();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            inputs.push_back(a(i, j));
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < x.cols(); ++c)
            inputs.push_back(x(i, c));
    return inputs;
}

} // namespace ffdelay
