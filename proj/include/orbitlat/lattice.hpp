#pragma once

#include "orbitlat/exterior.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace orbitlat {

/// Full-rank lattice in R^n; columns of `basis()` are the basis vectors.
/// Immutable and cheap to copy.
class Lattice {
public:
    explicit Lattice(Mat basis) : d_(std::make_shared<Data>()) {
        init(std::move(basis));
    }

    /// Rational-mode lattice: covolume and Plücker computations can be done exactly.
    explicit Lattice(const QMat& exact) : d_(std::make_shared<Data>()) {
        d_->exact = exact;
        init(to_double(exact));
        if (determinant<Rational>(exact) == 0) throw InputError("lattice basis is singular");
    }

    static Lattice identity(int n) { return Lattice(QMat(to_rational(IMat::Identity(n, n)))); }

    static Lattice diagonal(const Vec& d) { return Lattice(Mat(d.asDiagonal())); }

    int dim() const { return static_cast<int>(d_->basis.rows()); }
    const Mat& basis() const { return d_->basis; }
    const Mat& gram() const { return d_->gram; }
    double det() const { return d_->det; }
    bool has_exact() const { return d_->exact.has_value(); }
    const std::optional<QMat>& exact_basis() const { return d_->exact; }

    bool is_unimodular(double tol = kDefaultTol) const {
        if (has_exact()) return ScalarOps<Rational>::abs(determinant<Rational>(*d_->exact)) == 1;
        return std::abs(std::abs(d_->det) - 1.0) <= tol;
    }

    Vec vector(const IVec& coeffs) const { return d_->basis * coeffs.cast<double>(); }

private:
    struct Data {
        Mat basis;
        Mat gram;
        double det = 0.0;
        std::optional<QMat> exact;
    };

    void init(Mat basis) {
        if (basis.rows() != basis.cols() || basis.rows() == 0) throw InputError("lattice basis must be a nonempty square matrix");
        if (!basis.allFinite()) throw InputError("lattice basis has non-finite entries");
        d_->det = basis.determinant();
        Eigen::FullPivLU<Mat> lu(basis);
        if (lu.rank() != basis.rows() || d_->det == 0.0) throw InputError("lattice basis is singular");
        d_->gram = basis.transpose() * basis;
        d_->basis = std::move(basis);
    }

    std::shared_ptr<Data> d_;
};

/// Subgroup of a lattice given by integer coefficient vectors (columns) in the parent basis.
class Sublattice {
public:
    Sublattice(Lattice parent, IMat gens) : parent_(std::move(parent)), gens_(std::move(gens)) {
        if (gens_.rows() != parent_.dim()) throw InputError("sublattice generators have the wrong length");
        IntegerSpan span(gens_.rows());
        for (Eigen::Index j = 0; j < gens_.cols(); ++j)
            if (!span.try_add(gens_.col(j))) throw InputError("sublattice generators are linearly dependent");
    }

    static Sublattice trivial(const Lattice& parent) { return {parent, IMat(parent.dim(), 0)}; }
    static Sublattice whole(const Lattice& parent) {
        return {parent, IMat::Identity(parent.dim(), parent.dim())};
    }

    const Lattice& parent() const { return parent_; }
    const IMat& gens() const { return gens_; }
    int rank() const { return static_cast<int>(gens_.cols()); }

    /// Generators embedded in R^n (n x rank).
    Mat vectors() const { return parent_.basis() * gens_.cast<double>(); }

    /// Column Hermite form of the generators; equal iff the subgroups are equal.
    IMat canonical() const { return canonical_basis(gens_); }

    /// v_1 ^ ... ^ v_k for the generators.
    KVector<double> plucker() const { return wedge_columns<double>(vectors()); }

    std::optional<KVector<Rational>> exact_plucker() const {
        if (!parent_.has_exact()) return std::nullopt;
        return wedge_columns<Rational>(qmul(*parent_.exact_basis(), to_rational(gens_)));
    }

    bool same_subgroup(const Sublattice& o) const { return rank() == o.rank() && canonical() == o.canonical(); }

    /// Whether every generator of this subgroup lies in `o`.
    bool contained_in(const Sublattice& o) const {
        IMat h = o.canonical();
        for (Eigen::Index j = 0; j < gens_.cols(); ++j)
            if (!in_integer_span(h, gens_.col(j))) return false;
        return true;
    }

private:
    Lattice parent_;
    IMat gens_;
};

/// Euclidean volume of span(G)/G; 1 for the trivial subgroup.
inline double covolume(const Sublattice& g) {
    if (g.rank() == 0) return 1.0;
    Eigen::HouseholderQR<Mat> qr(g.vectors());
    Mat r = qr.matrixQR().topRows(g.rank()).triangularView<Eigen::Upper>();
    double c = 1.0;
    for (int i = 0; i < g.rank(); ++i) c *= std::abs(r(i, i));
    return c;
}

/// Exact squared covolume (Gram determinant) for rational-mode lattices.
inline std::optional<Rational> covolume_squared_exact(const Sublattice& g) {
    if (!g.parent().has_exact()) return std::nullopt;
    if (g.rank() == 0) return Rational(1);
    QMat v = qmul(*g.parent().exact_basis(), to_rational(g.gens()));
    QMat gram = qmul(v.transpose(), v);
    return determinant<Rational>(gram);
}

/// Primitive closure: parent intersected with the rational span of g.
inline Sublattice saturate(const Sublattice& g) { return {g.parent(), saturate_columns(g.gens())}; }

// ---------------------------------------------------------------------------
// Norms

enum class NormKind { euclidean, l_infinity, l_1, custom };

/// A norm on R^n with equivalence constants c_low |v|_2 <= N(v) <= c_high |v|_2.
class NormSpec {
public:
    static NormSpec euclidean() { return NormSpec(NormKind::euclidean, "euclidean"); }
    static NormSpec l_infinity() { return NormSpec(NormKind::l_infinity, "linf"); }
    static NormSpec l_1() { return NormSpec(NormKind::l_1, "l1"); }
    static NormSpec custom(std::string name, std::function<double(const Vec&)> eval, double c_low, double c_high,
                           std::optional<double> unit_ball_volume = std::nullopt) {
        NormSpec s(NormKind::custom, std::move(name));
        s.eval_ = std::move(eval);
        s.c_low_ = c_low;
        s.c_high_ = c_high;
        s.ball_volume_ = unit_ball_volume;
        return s;
    }

    static NormSpec parse(const std::string& name) {
        if (name == "euclidean" || name == "l2") return euclidean();
        if (name == "linf" || name == "l_infinity") return l_infinity();
        if (name == "l1" || name == "l_1") return l_1();
        throw InputError("unknown norm '" + name + "' (expected euclidean, linf or l1)");
    }

    NormKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    double operator()(const Vec& v) const {
        switch (kind_) {
            case NormKind::euclidean: return v.norm();
            case NormKind::l_infinity: return v.lpNorm<Eigen::Infinity>();
            case NormKind::l_1: return v.lpNorm<1>();
            case NormKind::custom: return eval_(v);
        }
        return 0.0;
    }

    double c_low(int n) const {
        switch (kind_) {
            case NormKind::euclidean: return 1.0;
            case NormKind::l_infinity: return 1.0 / std::sqrt(static_cast<double>(n));
            case NormKind::l_1: return 1.0;
            case NormKind::custom: return c_low_;
        }
        return 0.0;
    }

    double c_high(int n) const {
        switch (kind_) {
            case NormKind::euclidean: return 1.0;
            case NormKind::l_infinity: return 1.0;
            case NormKind::l_1: return std::sqrt(static_cast<double>(n));
            case NormKind::custom: return c_high_;
        }
        return 0.0;
    }

    /// Volume of the unit ball (a lower bound for custom norms without a stated volume).
    double unit_ball_volume(int n) const {
        switch (kind_) {
            case NormKind::euclidean: return orbitlat::unit_ball_volume(n);
            case NormKind::l_infinity: return std::pow(2.0, n);
            case NormKind::l_1: return std::pow(2.0, n) / std::tgamma(n + 1.0);
            case NormKind::custom:
                return ball_volume_ ? *ball_volume_ : orbitlat::unit_ball_volume(n) / std::pow(c_high_, n);
        }
        return 0.0;
    }

    /// Gradient of x -> log N(diag(exp x) u) at x = 0.
    Vec log_gradient(const Vec& u) const {
        const Eigen::Index n = u.size();
        Vec g = Vec::Zero(n);
        switch (kind_) {
            case NormKind::euclidean: {
                const double s = u.squaredNorm();
                if (s > 0) g = u.cwiseAbs2() / s;
                return g;
            }
            case NormKind::l_1: {
                const double s = u.lpNorm<1>();
                if (s > 0) g = u.cwiseAbs() / s;
                return g;
            }
            case NormKind::l_infinity: {
                Eigen::Index arg = 0;
                u.cwiseAbs().maxCoeff(&arg);
                g(arg) = 1.0;
                return g;
            }
            case NormKind::custom: {
                constexpr double h = 1e-6;
                for (Eigen::Index i = 0; i < n; ++i) {
                    Vec up = u, dn = u;
                    up(i) *= std::exp(h);
                    dn(i) *= std::exp(-h);
                    g(i) = (std::log(eval_(up)) - std::log(eval_(dn))) / (2 * h);
                }
                return g;
            }
        }
        return g;
    }

    /// Spot-checks the norm axioms and equivalence constants on random vectors.
    bool validate(int n, std::uint64_t seed = 1, int samples = 200) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        auto draw = [&] {
            Vec v(n);
            for (int i = 0; i < n; ++i) v(i) = gauss(rng);
            return v;
        };
        const double lo = c_low(n), hi = c_high(n);
        for (int s = 0; s < samples; ++s) {
            Vec u = draw(), w = draw();
            const double c = std::abs(gauss(rng)) + 0.1;
            const double nu = (*this)(u), nw = (*this)(w);
            if (!(nu > 0)) return false;
            if (std::abs((*this)(c * u) - c * nu) > 1e-9 * c * nu) return false;
            if ((*this)(u + w) > (nu + nw) * (1 + 1e-12)) return false;
            const double e = u.norm();
            if (nu < lo * e * (1 - 1e-12) || nu > hi * e * (1 + 1e-12)) return false;
        }
        return true;
    }

private:
    NormSpec(NormKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    NormKind kind_;
    std::string name_;
    std::function<double(const Vec&)> eval_;
    double c_low_ = 1.0;
    double c_high_ = 1.0;
    std::optional<double> ball_volume_;
};

}  // namespace orbitlat
