#pragma once

#include "orbitlat/lattice.hpp"

#include <algorithm>
#include <vector>

namespace orbitlat {

/// A lattice vector with its coefficients in the (unreduced) parent basis.
struct LatticeVector {
    IVec coeffs;
    Vec vec;
    double norm = 0.0;  // Euclidean
};

/// LLL-reduced basis `reduced = basis * transform` with a unimodular integer transform.
struct LllResult {
    Mat reduced;
    IMat transform;
};

/// Floating-point LLL on the columns of `basis` (delta = 0.99).
inline LllResult lll_reduce(const Mat& basis, double delta = 0.99) {
    const Eigen::Index n = basis.cols();
    LllResult out{basis, IMat::Identity(n, n)};
    Mat& b = out.reduced;
    IMat& t = out.transform;
    if (n <= 1) return out;

    Mat mu = Mat::Zero(n, n);
    Vec bstar_sq(n);
    auto gso = [&] {
        Mat bstar = b;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                mu(i, j) = b.col(i).dot(bstar.col(j)) / bstar_sq(j);
                bstar.col(i) -= mu(i, j) * bstar.col(j);
            }
            bstar_sq(i) = bstar.col(i).squaredNorm();
        }
    };
    auto size_reduce = [&](Eigen::Index k, Eigen::Index j) {
        const double r = std::round(mu(k, j));
        if (r == 0.0) return;
        if (std::abs(r) > 9e15) throw IntegrityError("LLL size reduction overflow");
        const auto q = static_cast<std::int64_t>(r);
        b.col(k) -= r * b.col(j);
        for (Eigen::Index i = 0; i < n; ++i) t(i, k) = checked_add(t(i, k), -checked_mul(q, t(i, j)));
        for (Eigen::Index l = 0; l <= j; ++l) mu(k, l) -= r * (l == j ? 1.0 : mu(j, l));
    };

    gso();
    Eigen::Index k = 1;
    std::size_t guard = 0;
    while (k < n) {
        if (++guard > 1'000'000) throw IntegrityError("LLL did not terminate");
        for (Eigen::Index j = k - 1; j >= 0; --j) size_reduce(k, j);
        if (bstar_sq(k) < (delta - mu(k, k - 1) * mu(k, k - 1)) * bstar_sq(k - 1)) {
            b.col(k).swap(b.col(k - 1));
            t.col(k).swap(t.col(k - 1));
            gso();
            k = std::max<Eigen::Index>(k - 1, 1);
        } else {
            ++k;
        }
    }
    return out;
}

struct EnumerationOptions {
    std::size_t cap = 10'000'000;
};

/// Fincke-Pohst enumeration over an LLL-reduced basis. Reusable for several radii.
class ShortVectorEnumerator {
public:
    explicit ShortVectorEnumerator(Lattice lattice) : lattice_(std::move(lattice)) {
        lll_ = lll_reduce(lattice_.basis());
        const Mat g = lll_.reduced.transpose() * lll_.reduced;
        Eigen::LLT<Mat> llt(g);
        if (llt.info() != Eigen::Success) throw IntegrityError("Gram matrix is not positive definite");
        const Mat r = llt.matrixU();
        const Eigen::Index n = r.rows();
        q_.resize(n);
        mu_ = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            q_(i) = r(i, i) * r(i, i);
            for (Eigen::Index j = i + 1; j < n; ++j) mu_(i, j) = r(i, j) / r(i, i);
        }
    }

    const Lattice& lattice() const { return lattice_; }
    const LllResult& reduction() const { return lll_; }

    /// All nonzero vectors with Euclidean norm <= radius, one per +- pair (first
    /// nonzero parent coefficient positive), sorted by norm then coefficients.
    std::vector<LatticeVector> within(double radius, const EnumerationOptions& opts = {}) const {
        if (!(radius > 0)) throw InputError("enumeration radius must be positive");
        const Eigen::Index n = q_.size();
        const double r2 = radius * radius;
        const double bound = r2 * (1 + 1e-9) + 1e-300;
        std::vector<LatticeVector> out;
        IVec c = IVec::Zero(n);
        std::vector<double> partial(n + 1, 0.0);

        // depth-first from the last coordinate; `top_zero` means all higher coefficients vanish
        auto recurse = [&](auto&& self, Eigen::Index i, bool top_zero) -> void {
            double center = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) center -= mu_(i, j) * static_cast<double>(c(j));
            const double rem = bound - partial[i + 1];
            if (rem < 0) return;
            const double half = std::sqrt(rem / q_(i));
            auto lo = static_cast<std::int64_t>(std::ceil(center - half));
            const auto hi = static_cast<std::int64_t>(std::floor(center + half));
            if (top_zero) lo = std::max<std::int64_t>(lo, 0);
            for (std::int64_t x = lo; x <= hi; ++x) {
                c(i) = x;
                const double d = static_cast<double>(x) - center;
                partial[i] = partial[i + 1] + q_(i) * d * d;
                if (partial[i] > bound) continue;
                if (i == 0) {
                    if (top_zero && x == 0) continue;
                    emit(c, r2, out, opts);
                } else {
                    self(self, i - 1, top_zero && x == 0);
                }
            }
            c(i) = 0;
        };
        recurse(recurse, n - 1, true);

        std::sort(out.begin(), out.end(), [](const LatticeVector& a, const LatticeVector& b) {
            if (a.norm != b.norm) return a.norm < b.norm;
            return std::lexicographical_compare(a.coeffs.data(), a.coeffs.data() + a.coeffs.size(), b.coeffs.data(),
                                                b.coeffs.data() + b.coeffs.size());
        });
        return out;
    }

private:
    void emit(const IVec& reduced_coeffs, double r2, std::vector<LatticeVector>& out,
              const EnumerationOptions& opts) const {
        IVec coeffs = lll_.transform * reduced_coeffs;
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            if (coeffs(i) == 0) continue;
            if (coeffs(i) < 0) coeffs = -coeffs;
            break;
        }
        Vec v = lattice_.vector(coeffs);
        const double sq = v.squaredNorm();
        if (sq > r2 * (1 + 1e-12)) return;
        if (out.size() >= opts.cap)
            throw ResourceError("short-vector enumeration exceeded the cap of " + std::to_string(opts.cap) + " vectors",
                                opts.cap);
        out.push_back({std::move(coeffs), std::move(v), std::sqrt(sq)});
    }

    Lattice lattice_;
    LllResult lll_;
    Vec q_;
    Mat mu_;
};

/// Nonzero lattice vectors of Euclidean norm <= radius, one per +- pair, sorted by norm.
inline std::vector<LatticeVector> enumerate_short_vectors(const Lattice& l, double radius,
                                                          const EnumerationOptions& opts = {}) {
    return ShortVectorEnumerator(l).within(radius, opts);
}

}  // namespace orbitlat
