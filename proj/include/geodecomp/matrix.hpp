#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace geodecomp {

/// Dense matrix over Rational, row-major. Sizes are fixed at construction;
/// a 0xN or Nx0 matrix is a first-class value.
class RatMatrix {
public:
    RatMatrix() : rows_(0), cols_(0) {}
    RatMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static RatMatrix identity(std::size_t n) {
        RatMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    /// Row-by-row construction, mainly for tests and small fixtures.
    static RatMatrix from_rows(std::initializer_list<std::initializer_list<Rational>> rows) {
        std::size_t r = rows.size();
        std::size_t c = r == 0 ? 0 : rows.begin()->size();
        RatMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c)
                throw DimensionMismatch("from_rows: ragged row lengths");
            std::size_t j = 0;
            for (const auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const RatMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const RatMatrix& o) const { return !(*this == o); }

    bool is_zero() const {
        for (const auto& v : data_)
            if (v != 0) return false;
        return true;
    }

private:
    std::size_t rows_, cols_;
    std::vector<Rational> data_;
};

inline RatMatrix operator+(const RatMatrix& a, const RatMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("matrix addition shape mismatch");
    RatMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(i, j) = a(i, j) + b(i, j);
    return r;
}

inline RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("matrix subtraction shape mismatch");
    RatMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(i, j) = a(i, j) - b(i, j);
    return r;
}

inline RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("matrix product shape mismatch: " +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
    RatMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Rational& aik = a(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                const Rational& bkj = b(k, j);
                if (bkj != 0) r(i, j) += aik * bkj;
            }
        }
    return r;
}

inline RatMatrix operator*(const Rational& s, const RatMatrix& a) {
    RatMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(i, j) = s * a(i, j);
    return r;
}

inline RatMatrix transpose(const RatMatrix& a) {
    RatMatrix r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(j, i) = a(i, j);
    return r;
}

/// Stack blocks side by side. All blocks must agree on row count; an empty
/// list yields the 0x0 matrix.
inline RatMatrix hstack(const std::vector<RatMatrix>& blocks) {
    if (blocks.empty()) return RatMatrix();
    std::size_t rows = blocks.front().rows();
    std::size_t cols = 0;
    for (const auto& b : blocks) {
        if (b.rows() != rows)
            throw DimensionMismatch("hstack: row counts differ");
        cols += b.cols();
    }
    RatMatrix r(rows, cols);
    std::size_t off = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < b.cols(); ++j)
                r(i, off + j) = b(i, j);
        off += b.cols();
    }
    return r;
}

/// Stack blocks top to bottom. All blocks must agree on column count.
inline RatMatrix vstack(const std::vector<RatMatrix>& blocks) {
    if (blocks.empty()) return RatMatrix();
    std::size_t cols = blocks.front().cols();
    std::size_t rows = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols)
            throw DimensionMismatch("vstack: column counts differ");
        rows += b.rows();
    }
    RatMatrix r(rows, cols);
    std::size_t off = 0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j)
                r(off + i, j) = b(i, j);
        off += b.rows();
    }
    return r;
}

inline RatMatrix row_slice(const RatMatrix& a, std::size_t first, std::size_t count) {
    if (first + count > a.rows())
        throw DimensionMismatch("row_slice out of range");
    RatMatrix r(count, a.cols());
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(i, j) = a(first + i, j);
    return r;
}

inline RatMatrix col_slice(const RatMatrix& a, std::size_t first, std::size_t count) {
    if (first + count > a.cols())
        throw DimensionMismatch("col_slice out of range");
    RatMatrix r(a.rows(), count);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < count; ++j)
            r(i, j) = a(i, first + j);
    return r;
}

inline RatMatrix column(const RatMatrix& a, std::size_t j) { return col_slice(a, j, 1); }

namespace detail {

/// a / b for integers known to divide exactly.
inline Integer divide_exact(const Integer& a, const Integer& b) {
    Integer q = a / b;
    if (q * b != a)
        throw Error("internal: inexact division in fraction-free elimination");
    return q;
}

struct Echelon {
    RatMatrix reduced;                    // reduced row echelon w.r.t. the first pivot_limit columns
    std::vector<std::size_t> pivot_cols;  // ascending
    std::size_t rank = 0;
};

/// Fraction-free forward elimination (with row swaps and column skips)
/// followed by back-substitution over Rational. Pivots are searched only in
/// the first pivot_limit columns; row operations span all columns, so
/// augmented columns are transformed consistently.
inline Echelon reduce(const RatMatrix& a, std::size_t pivot_limit) {
    const std::size_t rows = a.rows(), cols = a.cols();

    // Scale each row to integers. Row i is multiplied by the (positive) lcm
    // of its denominators, which preserves row space, rank and kernel.
    std::vector<std::vector<Integer>> z(rows, std::vector<Integer>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        Integer l = 1;
        for (std::size_t j = 0; j < cols; ++j)
            l = lcm(l, denominator(a(i, j)));
        for (std::size_t j = 0; j < cols; ++j)
            z[i][j] = numerator(a(i, j)) * (l / denominator(a(i, j)));
    }

    std::vector<std::size_t> pivot_cols;
    Integer prev = 1;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < pivot_limit && rank < rows; ++c) {
        std::size_t p = rank;
        while (p < rows && z[p][c] == 0) ++p;
        if (p == rows) continue;
        if (p != rank) std::swap(z[p], z[rank]);
        const Integer& piv = z[rank][c];
        for (std::size_t i = rank + 1; i < rows; ++i) {
            if (z[i][c] == 0) {
                // Still rescale by piv/prev so the fraction-free invariant holds.
                for (std::size_t j = c + 1; j < cols; ++j)
                    z[i][j] = divide_exact(piv * z[i][j], prev);
            } else {
                const Integer f = z[i][c];
                for (std::size_t j = c + 1; j < cols; ++j)
                    z[i][j] = divide_exact(piv * z[i][j] - f * z[rank][j], prev);
                z[i][c] = 0;
            }
        }
        prev = piv;
        pivot_cols.push_back(c);
        ++rank;
    }

    RatMatrix r(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            r(i, j) = Rational(z[i][j]);

    // Normalize pivots to 1 and clear above, bottom row first. Row k is zero
    // left of its pivot, so updates start at the pivot column.
    for (std::size_t k = rank; k-- > 0;) {
        const std::size_t pc = pivot_cols[k];
        const Rational piv = r(k, pc);
        for (std::size_t j = pc; j < cols; ++j)
            r(k, j) /= piv;
        for (std::size_t i = 0; i < k; ++i) {
            const Rational f = r(i, pc);
            if (f == 0) continue;
            for (std::size_t j = pc; j < cols; ++j)
                r(i, j) -= f * r(k, j);
        }
    }
    return Echelon{std::move(r), std::move(pivot_cols), rank};
}

} // namespace detail

struct RrefResult {
    RatMatrix reduced;
    std::vector<std::size_t> pivot_cols;
    std::size_t rank;
};

/// Reduced row echelon form. Exact; the result is the canonical RREF of the
/// input (unique, independent of elimination order).
inline RrefResult rref(const RatMatrix& a) {
    auto e = detail::reduce(a, a.cols());
    return RrefResult{std::move(e.reduced), std::move(e.pivot_cols), e.rank};
}

inline std::size_t rank(const RatMatrix& a) {
    return detail::reduce(a, a.cols()).rank;
}

/// Basis of the right kernel, read off the RREF free columns: column t sets
/// free variable t to 1, the remaining free variables to 0, and solves for
/// the pivot variables. Canonical for a given input.
inline RatMatrix kernel_basis(const RatMatrix& a) {
    auto e = detail::reduce(a, a.cols());
    std::vector<std::size_t> free_cols;
    {
        std::size_t next = 0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (next < e.pivot_cols.size() && e.pivot_cols[next] == j)
                ++next;
            else
                free_cols.push_back(j);
        }
    }
    RatMatrix k(a.cols(), free_cols.size());
    for (std::size_t t = 0; t < free_cols.size(); ++t) {
        k(free_cols[t], t) = 1;
        for (std::size_t p = 0; p < e.pivot_cols.size(); ++p)
            k(e.pivot_cols[p], t) = -e.reduced(p, free_cols[t]);
    }
    return k;
}

struct Solution {
    RatMatrix x; // m.cols() x b.cols(), with m * x == b
};
struct Infeasible {
    RatMatrix certificate; // y with rows() == m.rows(): transpose(y)*m == 0, transpose(y)*b != 0
};
using SolveResult = std::variant<Solution, Infeasible>;

/// Solve m*x = b column-wise. Either a solution (free variables set to zero)
/// or a certificate of infeasibility; both branches are re-checked by exact
/// re-substitution before returning.
inline SolveResult solve(const RatMatrix& m, const RatMatrix& b) {
    if (m.rows() != b.rows())
        throw DimensionMismatch("solve: row counts differ");
    const std::size_t n = m.rows();
    RatMatrix aug = hstack({m, b, RatMatrix::identity(n)});
    auto e = detail::reduce(aug, m.cols());

    for (std::size_t i = e.rank; i < n; ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            if (e.reduced(i, m.cols() + j) != 0) {
                RatMatrix y(n, 1);
                for (std::size_t t = 0; t < n; ++t)
                    y(t, 0) = e.reduced(i, m.cols() + b.cols() + t);
                RatMatrix yt = transpose(y);
                if (!(yt * m).is_zero() || (yt * b).is_zero())
                    throw Error("internal: infeasibility certificate failed re-check");
                return Infeasible{std::move(y)};
            }
        }
    }

    RatMatrix x(m.cols(), b.cols());
    for (std::size_t p = 0; p < e.pivot_cols.size(); ++p)
        for (std::size_t j = 0; j < b.cols(); ++j)
            x(e.pivot_cols[p], j) = e.reduced(p, m.cols() + j);
    if (m * x != b)
        throw Error("internal: solution failed re-substitution");
    return Solution{std::move(x)};
}

/// Inverse of a square matrix; throws SingularMatrix if rank-deficient.
inline RatMatrix inverse(const RatMatrix& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("inverse: matrix not square");
    auto res = solve(a, RatMatrix::identity(a.rows()));
    if (std::holds_alternative<Infeasible>(res))
        throw SingularMatrix("inverse: matrix is singular");
    RatMatrix x = std::get<Solution>(res).x;
    if (x * a != RatMatrix::identity(a.rows()))
        throw SingularMatrix("inverse: matrix is singular");
    return x;
}

struct Certified {
    RatMatrix combined; // hstack of the blocks, full column rank
};
struct DependencyWitness {
    RatMatrix combination; // nonzero coefficient vector with combined * combination == 0
};
using DirectSumResult = std::variant<Certified, DependencyWitness>;

/// Check that the column spans of the blocks form a direct sum inside an
/// ambient coordinate space: the concatenation must have rank equal to the
/// total column count. On failure a nonzero kernel vector is returned.
inline DirectSumResult direct_sum_check(const std::vector<RatMatrix>& blocks,
                                        std::size_t ambient_dim) {
    for (const auto& b : blocks)
        if (b.rows() != ambient_dim)
            throw DimensionMismatch("direct_sum_check: block has wrong ambient dimension");
    RatMatrix combined = hstack(blocks);
    if (combined.rows() == 0 && combined.cols() == 0)
        combined = RatMatrix(ambient_dim, 0);
    RatMatrix k = kernel_basis(combined);
    if (k.cols() == 0)
        return Certified{std::move(combined)};
    RatMatrix witness = column(k, 0);
    if (witness.is_zero() || !(combined * witness).is_zero())
        throw Error("internal: dependency witness failed re-check");
    return DependencyWitness{std::move(witness)};
}

} // namespace geodecomp
