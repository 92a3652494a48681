#pragma once

// Slow, independent reference computations for the tests. Nothing here calls the
// library's enumeration, reduction, Hermite form or covolume search.

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using QMat = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

inline double ball_volume(int k) { return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0); }

/// Textbook LLL (delta = 3/4) with Gram-Schmidt recomputed after every change.
/// Returns T with reduced = B * T.
inline IMat lll_transform(const Mat& b_in) {
    const Eigen::Index n = b_in.cols();
    Mat b = b_in;
    IMat t = IMat::Identity(n, n);
    auto gram_schmidt = [&](Mat& bs, Mat& mu) {
        bs = b;
        mu = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < i; ++j) {
                mu(i, j) = b.col(i).dot(bs.col(j)) / bs.col(j).squaredNorm();
                bs.col(i) -= mu(i, j) * bs.col(j);
            }
    };
    Mat bs, mu;
    gram_schmidt(bs, mu);
    Eigen::Index k = 1;
    int guard = 0;
    while (k < n) {
        if (++guard > 100000) throw std::runtime_error("oracle LLL did not terminate");
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            const double q = std::round(mu(k, j));
            if (q != 0.0) {
                b.col(k) -= q * b.col(j);
                t.col(k) -= static_cast<std::int64_t>(q) * t.col(j);
                gram_schmidt(bs, mu);
            }
        }
        if (bs.col(k).squaredNorm() >= (0.75 - mu(k, k - 1) * mu(k, k - 1)) * bs.col(k - 1).squaredNorm()) {
            ++k;
        } else {
            b.col(k).swap(b.col(k - 1));
            t.col(k).swap(t.col(k - 1));
            gram_schmidt(bs, mu);
            k = std::max<Eigen::Index>(k - 1, 1);
        }
    }
    return t;
}

struct Point {
    IVec coeffs;  // in the input basis
    Vec vec;
    double norm;
};

/// Every nonzero lattice vector with |v| <= r, one per +- pair (first nonzero
/// coefficient positive). Coefficients c in a reduced basis R satisfy
/// |c_i| <= r * |row i of R^{-1}|, and the whole box is scanned.
inline std::vector<Point> box_enumerate(const Mat& basis, double r, std::size_t cap = 50'000'000) {
    const Eigen::Index n = basis.cols();
    const IMat t = lll_transform(basis);
    const Mat red = basis * t.cast<double>();
    const Mat inv = red.inverse();
    std::vector<std::int64_t> bound(n);
    double volume = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        bound[i] = static_cast<std::int64_t>(std::floor(r * inv.row(i).norm() + 1e-9));
        volume *= 2.0 * bound[i] + 1;
    }
    if (volume > static_cast<double>(cap)) throw std::runtime_error("oracle box too large");
    std::vector<Point> out;
    IVec c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = -bound[i];
    for (;;) {
        if (!c.isZero()) {
            const IVec coeffs = t * c;
            Eigen::Index first = 0;
            while (coeffs(first) == 0) ++first;
            if (coeffs(first) > 0) {
                const Vec v = red * c.cast<double>();
                const double len = v.norm();
                if (len <= r * (1 + 1e-12)) out.push_back({coeffs, v, len});
            }
        }
        Eigen::Index i = 0;
        while (i < n && c(i) == bound[i]) {
            c(i) = -bound[i];
            ++i;
        }
        if (i == n) break;
        ++c(i);
    }
    std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) { return a.norm < b.norm; });
    return out;
}

struct Minima {
    std::vector<double> values;
    std::vector<IVec> witnesses;
};

/// Greedy selection of independent vectors in order of N over the box enumeration;
/// the radius covers max N over an LLL basis, which bounds lambda_n.
inline Minima minima(const Mat& basis, const std::function<double(const Vec&)>& norm, double c_low) {
    const Eigen::Index n = basis.cols();
    const Mat red = basis * lll_transform(basis).cast<double>();
    double top = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, norm(red.col(i)));
    auto pts = box_enumerate(basis, top / c_low * (1 + 1e-9));
    std::stable_sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) { return norm(a.vec) < norm(b.vec); });
    Minima m;
    Mat chosen(n, 0);
    for (const auto& p : pts) {
        Mat cand(n, chosen.cols() + 1);
        cand << chosen, p.coeffs.cast<double>();
        if (Eigen::FullPivLU<Mat>(cand).rank() == cand.cols()) {
            chosen = cand;
            m.values.push_back(norm(p.vec));
            m.witnesses.push_back(p.coeffs);
            if (chosen.cols() == n) break;
        }
    }
    return m;
}

inline Minima euclidean_minima(const Mat& basis) {
    return minima(basis, [](const Vec& v) { return v.norm(); }, 1.0);
}

/// Fraction-free determinant of a small integer matrix.
inline boost::multiprecision::cpp_int int_det(IMat m) {
    using boost::multiprecision::cpp_int;
    const Eigen::Index k = m.rows();
    if (k == 0) return 1;
    std::vector<std::vector<cpp_int>> a(k, std::vector<cpp_int>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) a[i][j] = m(i, j);
    cpp_int prev = 1;
    int sign = 1;
    for (Eigen::Index p = 0; p + 1 < k; ++p) {
        if (a[p][p] == 0) {
            Eigen::Index s = p + 1;
            while (s < k && a[s][p] == 0) ++s;
            if (s == k) return 0;
            std::swap(a[s], a[p]);
            sign = -sign;
        }
        for (Eigen::Index i = p + 1; i < k; ++i)
            for (Eigen::Index j = p + 1; j < k; ++j) a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
        prev = a[p][p];
    }
    return sign * a[k - 1][k - 1];
}

/// gcd of the k x k minors of an n x k integer matrix: the index of the subgroup
/// in its saturation, 0 when the columns are dependent.
inline boost::multiprecision::cpp_int minor_gcd(const IMat& gens) {
    using boost::multiprecision::cpp_int;
    const Eigen::Index n = gens.rows(), k = gens.cols();
    cpp_int g = 0;
    std::vector<int> rows(k);
    std::iota(rows.begin(), rows.end(), 0);
    for (;;) {
        IMat minor(k, k);
        for (Eigen::Index r = 0; r < k; ++r) minor.row(r) = gens.row(rows[r]);
        cpp_int d = int_det(minor);
        if (d < 0) d = -d;
        g = boost::multiprecision::gcd(g, d);
        Eigen::Index i = k - 1;
        while (i >= 0 && rows[i] == n - k + i) --i;
        if (i < 0) break;
        ++rows[i];
        for (Eigen::Index j = i + 1; j < k; ++j) rows[j] = rows[j - 1] + 1;
    }
    return g;
}

/// Covolume of the saturation of the subgroup generated by `gens`.
inline double saturated_covolume(const Mat& basis, const IMat& gens) {
    const Mat v = basis * gens.cast<double>();
    const double gram = (v.transpose() * v).determinant();
    return std::sqrt(std::max(gram, 0.0)) / minor_gcd(gens).convert_to<double>();
}

inline Rational rational_det(QMat a) {
    const Eigen::Index k = a.rows();
    Rational d = 1;
    for (Eigen::Index p = 0; p < k; ++p) {
        Eigen::Index s = p;
        while (s < k && a(s, p) == 0) ++s;
        if (s == k) return 0;
        if (s != p) {
            a.row(s).swap(a.row(p));
            d = -d;
        }
        d *= a(p, p);
        for (Eigen::Index i = p + 1; i < k; ++i) {
            const Rational f = a(i, p) / a(p, p);
            for (Eigen::Index j = p; j < k; ++j) a(i, j) -= f * a(p, j);
        }
    }
    return d;
}

inline Rational saturated_covolume_squared(const QMat& basis, const IMat& gens) {
    const Eigen::Index n = basis.rows(), k = gens.cols();
    QMat v(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            Rational s = 0;
            for (Eigen::Index m = 0; m < n; ++m) s += basis(i, m) * Rational(gens(m, j));
            v(i, j) = s;
        }
    QMat gram(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            Rational s = 0;
            for (Eigen::Index i = 0; i < n; ++i) s += v(i, a) * v(i, b);
            gram(a, b) = s;
        }
    const auto idx = minor_gcd(gens);
    return rational_det(gram) / Rational(idx * idx);
}

struct MinCov {
    double covolume = 0.0;
    IMat gens;
    std::size_t subsets = 0;
    std::optional<Rational> covolume_squared;
};

/// Minimal covolume over rank-k subgroups. A minimising saturated G is the
/// saturation of its own successive-minima vectors w_i, whose lengths multiply to
/// at most (2^k / V_k) cov G <= (2^k / V_k) lambda_1 ... lambda_k; each is at least
/// lambda_1, so all have length <= (2^k / V_k) lambda_1 ... lambda_k / lambda_1^{k-1}.
inline MinCov min_covolume(const Mat& basis, int k, const QMat* exact = nullptr) {
    const Eigen::Index n = basis.cols();
    MinCov best;
    if (k == 0) {
        best.covolume = 1.0;
        best.gens = IMat(n, 0);
        if (exact) best.covolume_squared = Rational(1);
        return best;
    }
    const Minima m = euclidean_minima(basis);
    double cov0 = 1.0;
    for (int i = 0; i < k; ++i) cov0 *= m.values[i];
    const double kappa = std::pow(2.0, k) / ball_volume(k);
    const double product_bound = kappa * cov0 * (1 + 1e-9);
    const double radius = product_bound / std::pow(m.values[0], k - 1);
    const auto pts = box_enumerate(basis, radius);

    best.covolume = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(k);
    auto rec = [&](auto&& self, int depth, std::size_t from, double prod) -> void {
        for (std::size_t i = from; i < pts.size(); ++i) {
            if (prod * std::pow(pts[i].norm, k - depth) > product_bound) break;
            pick[depth] = i;
            if (depth + 1 < k) {
                self(self, depth + 1, i + 1, prod * pts[i].norm);
                continue;
            }
            IMat gens(n, k);
            for (int j = 0; j < k; ++j) gens.col(j) = pts[pick[j]].coeffs;
            if (minor_gcd(gens) == 0) continue;
            ++best.subsets;
            if (exact) {
                const Rational c2 = saturated_covolume_squared(*exact, gens);
                if (!best.covolume_squared || c2 < *best.covolume_squared) {
                    best.covolume_squared = c2;
                    best.covolume = std::sqrt(c2.convert_to<double>());
                    best.gens = gens;
                }
            } else {
                const double c = saturated_covolume(basis, gens);
                if (c < best.covolume) {
                    best.covolume = c;
                    best.gens = gens;
                }
            }
        }
    };
    rec(rec, 0, 0, 1.0);
    return best;
}

/// min over proper ranks of log(min covolume) - (k/n) log|det|.
inline double stability_margin(const Mat& basis) {
    const Eigen::Index n = basis.cols();
    const double slope = std::log(std::abs(basis.determinant())) / static_cast<double>(n);
    double margin = n == 1 ? 0.0 : std::numeric_limits<double>::infinity();
    for (int k = 1; k < n; ++k) margin = std::min(margin, std::log(min_covolume(basis, k).covolume) - k * slope);
    return margin;
}

/// Every permutation (1-based tables) with sigma({1..dim V}) in supp V for each
/// member, where supp is decided by the k x k minors of the member's basis.
inline std::vector<std::vector<int>> valid_permutations(const std::vector<Mat>& chain, double tol) {
    const Eigen::Index n = chain.front().rows();
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 1);
    std::vector<std::vector<int>> out;
    do {
        bool ok = true;
        for (const Mat& b : chain) {
            const Eigen::Index k = b.cols();
            if (k == 0 || k == n) continue;
            Mat minor(k, k);
            for (Eigen::Index r = 0; r < k; ++r) minor.row(r) = b.row(p[r] - 1);
            const double scale = std::max(1.0, b.colwise().norm().prod());
            if (std::abs(minor.determinant()) <= tol * scale) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace oracle
