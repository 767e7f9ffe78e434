#pragma once

#include <cstdint>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "ffdelay/bigint.hpp"
#include "ffdelay/error.hpp"

namespace ffdelay {

/// Non-owning rectangular view into a row-major buffer with an explicit
/// leading dimension: entry (i,j) lives at data[i*ld + j].  Views alias their
/// parent; writes through a view are visible in every overlapping view.
template <class T>
class matrix_view {
public:
    matrix_view() = default;

    matrix_view(T* data, int rows, int cols, int ld)
        : data_(data), rows_(rows), cols_(cols), ld_(ld)
    {
        if (rows < 0 || cols < 0 || ld < cols)
            throw contract_error("matrix_view: need rows,cols >= 0 and cols <= ld");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int ld() const { return ld_; }

    T& operator()(int i, int j) const
    {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
            throw std::out_of_range("matrix_view: index (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside " + std::to_string(rows_) +
                                    "x" + std::to_string(cols_));
        return data_[static_cast<std::size_t>(i) * ld_ + j];
    }

    /// Aliasing sub-rectangle of size nrows x ncols anchored at (i0, j0).
    matrix_view block(int i0, int j0, int nrows, int ncols) const
    {
        if (i0 < 0 || j0 < 0 || nrows < 0 || ncols < 0 || i0 + nrows > rows_ ||
            j0 + ncols > cols_)
            throw std::out_of_range("matrix_view::block: rectangle out of bounds");
        return matrix_view(data_ + static_cast<std::size_t>(i0) * ld_ + j0, nrows, ncols, ld_);
    }

    matrix_view<const T> as_const() const { return {data_, rows_, cols_, ld_}; }

    operator matrix_view<const T>() const
        requires(!std::is_const_v<T>)
    {
        return as_const();
    }

private:
    T* data_ = nullptr;
    int rows_ = 0;
    int cols_ = 0;
    int ld_ = 0;
};

/// Owning row-major matrix (ld == cols).
template <class T>
class matrix {
public:
    matrix() = default;

    matrix(int rows, int cols, T init = T{})
        : data_(static_cast<std::size_t>(rows) * cols, init), rows_(rows), cols_(cols)
    {
        if (rows < 0 || cols < 0)
            throw contract_error("matrix: negative extent");
    }

    static matrix from_rows(std::initializer_list<std::initializer_list<T>> rows)
    {
        const int n = static_cast<int>(rows.size());
        const int m = n == 0 ? 0 : static_cast<int>(rows.begin()->size());
        matrix out(n, m);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != m)
                throw contract_error("matrix::from_rows: ragged rows");
            int j = 0;
            for (const auto& v : row)
                out(i, j++) = v;
            ++i;
        }
        return out;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return view()(i, j); }
    const T& operator()(int i, int j) const { return view()(i, j); }

    matrix_view<T> view() { return {data_.data(), rows_, cols_, cols_}; }
    matrix_view<const T> view() const { return {data_.data(), rows_, cols_, cols_}; }

    friend bool operator==(const matrix&, const matrix&) = default;

private:
    std::vector<T> data_;
    int rows_ = 0;
    int cols_ = 0;
};

using fp_matrix = matrix<double>;
using exact_matrix = matrix<big_int>;

/// Every entry is a finite integer of magnitude at most 2^53 (the exact-int
/// predicate of the delayed kernels' contracts).
inline bool is_exact_int_mat(matrix_view<const double> x)
{
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double v = x(i, j);
            if (!is_integer_valued(v) || v > static_cast<double>(max_exact_int) ||
                v < -static_cast<double>(max_exact_int))
                return false;
        }
    return true;
}

/// Every entry lies in [lo, hi].  Assumes is_exact_int_mat(x); bounds of
/// magnitude <= 2^53 compare exactly in binary64.
inline bool is_bounded_by(matrix_view<const double> x, std::int64_t lo, std::int64_t hi)
{
    const double dlo = static_cast<double>(lo);
    const double dhi = static_cast<double>(hi);
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double v = x(i, j);
            if (!(dlo <= v && v <= dhi))
                return false;
        }
    return true;
}

inline exact_matrix to_exact(matrix_view<const double> x)
{
    exact_matrix out(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            auto v = exact_integer_of(x(i, j));
            if (!v || *v > max_exact_int || *v < -max_exact_int)
                throw conversion_error("to_exact: entry (" + std::to_string(i) + "," +
                                       std::to_string(j) + ") is not an exact integer in range");
            out(i, j) = std::move(*v);
        }
    return out;
}

inline fp_matrix from_exact(matrix_view<const big_int> e)
{
    fp_matrix out(e.rows(), e.cols());
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) {
            const big_int& v = e(i, j);
            if (v > max_exact_int || v < -max_exact_int)
                throw conversion_error("from_exact: entry (" + std::to_string(i) + "," +
                                       std::to_string(j) + ") exceeds 2^53 in magnitude");
            out(i, j) = v.convert_to<double>();
        }
    return out;
}

inline exact_matrix to_exact(const fp_matrix& x) { return to_exact(x.view()); }
inline fp_matrix from_exact(const exact_matrix& e) { return from_exact(e.view()); }

// --- text matrix format -----------------------------------------------------
//
// One block is:   a header line "N K p", then N lines of K decimal integers
// separated by single spaces.  Entries must be exact integers of magnitude
// at most 2^53.

struct matrix_block {
    fp_matrix values;
    std::int64_t modulus = 0;
};

inline matrix_block read_matrix_block(std::istream& in)
{
    std::string line;
    do {
        if (!std::getline(in, line))
            throw parse_error("matrix block: missing header line");
    } while (line.find_first_not_of(" \t\r") == std::string::npos);

    std::istringstream header(line);
    long long n = 0, k = 0, p = 0;
    if (!(header >> n >> k >> p))
        throw parse_error("matrix block: header must be 'N K p'");
    std::string extra;
    if (header >> extra)
        throw parse_error("matrix block: trailing token '" + extra + "' after header");
    if (n < 1 || k < 1)
        throw parse_error("matrix block: need N >= 1 and K >= 1");
    if (p < 2)
        throw parse_error("matrix block: need p >= 2");

    matrix_block out;
    out.modulus = p;
    out.values = fp_matrix(static_cast<int>(n), static_cast<int>(k));
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw parse_error("matrix block: missing row " + std::to_string(i));
        std::istringstream row(line);
        for (int j = 0; j < k; ++j) {
            long long v = 0;
            if (!(row >> v))
                throw parse_error("matrix block: row " + std::to_string(i) + " needs " +
                                  std::to_string(k) + " integer entries");
            if (v > max_exact_int || v < -max_exact_int)
                throw parse_error("matrix block: entry (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") exceeds 2^53 in magnitude");
            out.values(i, j) = static_cast<double>(v);
        }
        if (row >> extra)
            throw parse_error("matrix block: row " + std::to_string(i) + " has trailing token '" +
                              extra + "'");
    }
    return out;
}

inline void write_matrix_block(std::ostream& out, matrix_view<const double> x, std::int64_t p)
{
    if (!is_exact_int_mat(x))
        throw conversion_error("write_matrix_block: matrix is not exact-integer valued");
    out << x.rows() << ' ' << x.cols() << ' ' << p << '\n';
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) {
            if (j)
                out << ' ';
            out << static_cast<long long>(x(i, j));
        }
        out << '\n';
    }
}

} // namespace ffdelay
