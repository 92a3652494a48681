#pragma once

#include "orbitlat/common.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace orbitlat {

template <typename T>
using DMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using DVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

namespace detail {

// In-place row echelon form with full-column partial pivoting; returns pivot columns.
// For double, an entry counts as zero when |x| <= tol * scale where scale is the
// largest magnitude in the input.
template <typename T>
std::vector<Eigen::Index> row_echelon(DMat<T>& m, double tol) {
    using Ops = ScalarOps<T>;
    double scale = 0.0;
    if constexpr (!Ops::exact) scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    const double eps = Ops::exact ? 0.0 : tol * std::max(1.0, scale);

    std::vector<Eigen::Index> pivots;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
        Eigen::Index best = row;
        for (Eigen::Index r = row + 1; r < m.rows(); ++r)
            if (Ops::abs(m(r, col)) > Ops::abs(m(best, col))) best = r;
        if (Ops::is_zero(m(best, col), eps)) continue;
        if (best != row) m.row(best).swap(m.row(row));
        for (Eigen::Index r = row + 1; r < m.rows(); ++r) {
            if (Ops::is_zero(m(r, col), 0.0)) continue;
            T f = m(r, col) / m(row, col);
            for (Eigen::Index c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
            m(r, col) = T(0);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace detail

/// Rank of a matrix; exact for Rational, relative tolerance for double.
template <typename T>
int matrix_rank(DMat<T> m, double tol = kDefaultTol) {
    return static_cast<int>(detail::row_echelon(m, tol).size());
}

/// Basis of the right null space, one vector per column.
template <typename T>
DMat<T> null_space(DMat<T> m, double tol = kDefaultTol) {
    const Eigen::Index cols = m.cols();
    auto pivots = detail::row_echelon(m, tol);
    const auto rank = static_cast<Eigen::Index>(pivots.size());
    // back-substitute to reduced form
    for (Eigen::Index i = rank - 1; i >= 0; --i) {
        T p = m(i, pivots[i]);
        m.row(i) /= p;
        for (Eigen::Index r = 0; r < i; ++r) {
            T f = m(r, pivots[i]);
            if (f != T(0)) m.row(r) -= f * m.row(i);
        }
    }
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    DMat<T> basis(cols, cols - rank);
    Eigen::Index out = 0;
    for (Eigen::Index free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        DVec<T> v = DVec<T>::Zero(cols);
        v(free) = T(1);
        for (Eigen::Index i = 0; i < rank; ++i) v(pivots[i]) = -m(i, free);
        basis.col(out++) = v;
    }
    return basis;
}

/// Determinant by elimination (exact for Rational).
template <typename T>
T determinant(DMat<T> m) {
    if (m.rows() != m.cols()) throw InputError("determinant of a non-square matrix");
    const Eigen::Index n = m.rows();
    T det(1);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index best = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (ScalarOps<T>::abs(m(r, col)) > ScalarOps<T>::abs(m(best, col))) best = r;
        if (m(best, col) == T(0)) return T(0);
        if (best != col) {
            m.row(best).swap(m.row(col));
            det = -det;
        }
        det *= m(col, col);
        for (Eigen::Index r = col + 1; r < n; ++r) {
            T f = m(r, col) / m(col, col);
            if (f != T(0))
                for (Eigen::Index c = col; c < n; ++c) m(r, c) -= f * m(col, c);
        }
    }
    return det;
}

// ---------------------------------------------------------------------------
// Integer column operations

/// Result of reducing an integer matrix by unimodular column operations:
/// `form = input * U` and `inverse = U^{-1}`.
struct ColumnEchelon {
    IMat form;
    IMat inverse;
    std::vector<Eigen::Index> pivot_rows;  // pivot row of each nonzero column, in order
};

namespace detail {

inline std::tuple<std::int64_t, std::int64_t, std::int64_t> ext_gcd(std::int64_t a, std::int64_t b) {
    std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
        std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
    }
    if (old_r < 0) return {-old_r, -old_s, -old_t};
    return {old_r, old_s, old_t};
}

}  // namespace detail

/// Column-style Hermite normal form. Columns of the result are ordered by pivot
/// row; pivots positive; entries left of a pivot (same row) reduced into [0, pivot).
/// Zero columns, if any, come last.
inline ColumnEchelon column_hermite_form(const IMat& input) {
    ColumnEchelon out{input, IMat::Identity(input.cols(), input.cols()), {}};
    IMat& a = out.form;
    IMat& v = out.inverse;
    const Eigen::Index rows = a.rows(), cols = a.cols();

    auto add_col = [&](Eigen::Index dst, Eigen::Index src, std::int64_t q) {
        // col dst -= q * col src ; inverse: row src += q * row dst
        if (q == 0) return;
        for (Eigen::Index r = 0; r < rows; ++r) a(r, dst) = checked_add(a(r, dst), -checked_mul(q, a(r, src)));
        for (Eigen::Index c = 0; c < cols; ++c) v(src, c) = checked_add(v(src, c), checked_mul(q, v(dst, c)));
    };
    auto swap_col = [&](Eigen::Index i, Eigen::Index j) {
        if (i == j) return;
        a.col(i).swap(a.col(j));
        v.row(i).swap(v.row(j));
    };
    auto negate_col = [&](Eigen::Index i) {
        a.col(i) = -a.col(i);
        v.row(i) = -v.row(i);
    };

    Eigen::Index c = 0;
    for (Eigen::Index r = 0; r < rows && c < cols; ++r) {
        // gcd-combine row r over columns c..cols-1 into column c
        for (Eigen::Index j = c + 1; j < cols; ++j) {
            if (a(r, j) == 0) continue;
            if (a(r, c) == 0) {
                swap_col(c, j);
                continue;
            }
            auto [g, p, q] = detail::ext_gcd(a(r, c), a(r, j));
            const std::int64_t ac = a(r, c) / g, aj = a(r, j) / g;
            // [col c, col j] <- [col c, col j] * [[p, -aj], [q, ac]]
            for (Eigen::Index k = 0; k < rows; ++k) {
                std::int64_t x = a(k, c), y = a(k, j);
                a(k, c) = checked_add(checked_mul(p, x), checked_mul(q, y));
                a(k, j) = checked_add(checked_mul(-aj, x), checked_mul(ac, y));
            }
            // inverse rows: [row c; row j] <- [[ac, aj], [-q, p]] * [row c; row j]
            for (Eigen::Index k = 0; k < cols; ++k) {
                std::int64_t x = v(c, k), y = v(j, k);
                v(c, k) = checked_add(checked_mul(ac, x), checked_mul(aj, y));
                v(j, k) = checked_add(checked_mul(-q, x), checked_mul(p, y));
            }
        }
        if (a(r, c) == 0) continue;
        if (a(r, c) < 0) negate_col(c);
        for (Eigen::Index l = 0; l < c; ++l) add_col(l, c, floor_div(a(r, l), a(r, c)));
        out.pivot_rows.push_back(r);
        ++c;
    }
    return out;
}

/// Primitive closure of the column span of `coeffs` inside Z^n: an n x k integer
/// basis (in column Hermite form) of Z^n intersected with the rational span.
/// Throws InputError when the columns are dependent.
inline IMat saturate_columns(const IMat& coeffs) {
    const Eigen::Index k = coeffs.cols();
    if (k == 0) return IMat(coeffs.rows(), 0);
    ColumnEchelon e = column_hermite_form(coeffs.transpose());
    if (static_cast<Eigen::Index>(e.pivot_rows.size()) != k)
        throw InputError("sublattice generators are linearly dependent");
    IMat basis = e.inverse.topRows(k).transpose();
    return column_hermite_form(basis).form;
}

/// Canonical basis of the subgroup generated by the columns (column HNF, zero columns dropped).
inline IMat canonical_basis(const IMat& gens) {
    ColumnEchelon e = column_hermite_form(gens);
    return e.form.leftCols(static_cast<Eigen::Index>(e.pivot_rows.size()));
}

/// Whether v lies in the Z-span of a basis given in column Hermite form.
inline bool in_integer_span(const IMat& hermite, IVec v) {
    ColumnEchelon e = column_hermite_form(hermite);
    for (std::size_t j = 0; j < e.pivot_rows.size(); ++j) {
        const auto r = e.pivot_rows[j];
        const auto col = static_cast<Eigen::Index>(j);
        if (v(r) % e.form(r, col) != 0) return false;
        const std::int64_t q = v(r) / e.form(r, col);
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = checked_add(v(i), -checked_mul(q, e.form(i, col)));
    }
    return v.isZero();
}

/// Incrementally maintained span of integer vectors with an exact independence test.
class IntegerSpan {
public:
    explicit IntegerSpan(Eigen::Index n) : n_(n) {}

    Eigen::Index dim() const { return static_cast<Eigen::Index>(rows_.size()); }

    /// Adds v if it is independent of the current span; returns whether it was added.
    bool try_add(const IVec& v) {
        std::vector<__int128> w(v.data(), v.data() + v.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto p = pivots_[i];
            if (w[p] == 0) continue;
            const __int128 a = rows_[i][p], b = w[p];
            for (Eigen::Index c = 0; c < n_; ++c) w[c] = a * w[c] - b * rows_[i][c];
            normalize(w);
        }
        auto it = std::find_if(w.begin(), w.end(), [](__int128 x) { return x != 0; });
        if (it == w.end()) return false;
        normalize(w);
        pivots_.push_back(static_cast<Eigen::Index>(it - w.begin()));
        rows_.push_back(std::move(w));
        return true;
    }

    bool contains(const IVec& v) const {
        IntegerSpan copy = *this;
        return !copy.try_add(v);
    }

private:
    static void normalize(std::vector<__int128>& w) {
        __int128 g = 0;
        for (auto x : w) {
            __int128 y = x < 0 ? -x : x;
            while (y != 0) {
                __int128 t = g % y;
                g = y;
                y = t;
            }
        }
        if (g > 1)
            for (auto& x : w) x /= g;
        constexpr __int128 limit = static_cast<__int128>(1) << 62;
        for (auto x : w)
            if (x > limit || x < -limit) throw IntegrityError("coefficient growth in span test");
    }

    Eigen::Index n_;
    std::vector<std::vector<__int128>> rows_;
    std::vector<Eigen::Index> pivots_;
};

}  // namespace orbitlat
