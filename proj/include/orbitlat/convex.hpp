#pragma once

// Open H-polyhedra {x : a_i . x < b_i}: invariance dimension, degree, escape
// functionals and the cover hypothesis checker.

#include "orbitlat/linalg.hpp"
#include "orbitlat/lp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace orbitlat {

/// Slack used to witness strict feasibility of the open inequalities.
inline constexpr double kInteriorSlack = 1e-7;

struct Inequality {
    Vec a;
    double b;
};

/// Open polyhedron {x in R^n : a . x < b for every inequality}.
class Polyhedron {
public:
    explicit Polyhedron(int n) : n_(n) {
        if (n <= 0) throw InputError("polyhedron dimension must be positive");
    }
    Polyhedron(int n, std::vector<Inequality> ineqs) : Polyhedron(n) {
        for (auto& q : ineqs) add(std::move(q.a), q.b);
    }

    /// Open box prod (lo_i, hi_i).
    static Polyhedron box(const Vec& lo, const Vec& hi) {
        Polyhedron p(static_cast<int>(lo.size()));
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            p.add(Vec::Unit(lo.size(), i), hi(i));
            p.add(-Vec::Unit(lo.size(), i), -lo(i));
        }
        return p;
    }

    int dim() const { return n_; }
    const std::vector<Inequality>& inequalities() const { return ineqs_; }
    std::size_t size() const { return ineqs_.size(); }

    void add(Vec a, double b) {
        if (a.size() != n_) throw InputError("inequality has the wrong dimension");
        if (!a.allFinite() || !std::isfinite(b)) throw InputError("inequality has non-finite entries");
        ineqs_.push_back({std::move(a), b});
        empty_.reset();
    }

    bool contains(const Vec& x) const {
        for (const auto& q : ineqs_)
            if (!(q.a.dot(x) < q.b)) return false;
        return true;
    }

    /// {x + v : x in P}
    Polyhedron translated(const Vec& v) const {
        Polyhedron p(n_);
        for (const auto& q : ineqs_) p.add(q.a, q.b + q.a.dot(v));
        return p;
    }

    /// Coordinates permuted: x -> y with y_{perm[i]} = x_i (0-based).
    Polyhedron permuted(const std::vector<int>& perm) const {
        Polyhedron p(n_);
        for (const auto& q : ineqs_) {
            Vec a(n_);
            for (int i = 0; i < n_; ++i) a(perm[i]) = q.a(i);
            p.add(std::move(a), q.b);
        }
        return p;
    }

    Polyhedron intersect(const Polyhedron& o) const {
        if (o.n_ != n_) throw InputError("intersecting polyhedra of different dimension");
        Polyhedron p = *this;
        for (const auto& q : o.ineqs_) p.add(q.a, q.b);
        return p;
    }

    /// Normals as rows.
    Mat normals() const {
        Mat m(static_cast<Eigen::Index>(ineqs_.size()), n_);
        for (std::size_t i = 0; i < ineqs_.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = ineqs_[i].a.transpose();
        return m;
    }

    /// Emptiness cache shared with is_empty().
    std::optional<bool>& empty_cache() const { return empty_; }

private:
    int n_;
    std::vector<Inequality> ineqs_;
    mutable std::optional<bool> empty_;
};

/// A point of P at distance >= kInteriorSlack from every bounding hyperplane, if any.
inline std::optional<Vec> interior_point(const Polyhedron& p) {
    const int n = p.dim();
    LinearProgram lp(n + 1);  // x, s
    lp.objective(n) = 1.0;
    for (const auto& q : p.inequalities()) {
        Vec row(n + 1);
        row.head(n) = q.a;
        row(n) = q.a.norm();
        if (row(n) == 0.0) {
            if (q.b <= 0) return std::nullopt;  // 0 < b fails everywhere
            continue;
        }
        lp.add_le(row, q.b);
    }
    lp.add_le(Vec::Unit(n + 1, n), 1.0);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::optimal || r.x(n) <= kInteriorSlack) return std::nullopt;
    return Vec(r.x.head(n));
}

inline bool is_empty(const Polyhedron& p) {
    auto& cache = p.empty_cache();
    if (!cache) cache = !interior_point(p).has_value();
    return *cache;
}

namespace detail {

/// Closed relaxation {a . x <= b} as LP rows.
inline void add_closed(LinearProgram& lp, const Polyhedron& p, std::size_t skip = static_cast<std::size_t>(-1)) {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (i != skip) lp.add_le(p.inequalities()[i].a, p.inequalities()[i].b);
}

}  // namespace detail

/// Same set with every inequality implied by the remaining ones removed.
inline Polyhedron remove_redundant(const Polyhedron& p) {
    if (is_empty(p)) return p;
    Polyhedron cur = p;
    for (std::size_t i = 0; i < cur.size();) {
        const Inequality& q = cur.inequalities()[i];
        if (q.a.isZero(0.0)) {  // 0 < b with b > 0 on a nonempty set
            std::vector<Inequality> rest(cur.inequalities());
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
            cur = Polyhedron(cur.dim(), rest);
            continue;
        }
        LinearProgram lp(cur.dim());
        lp.objective = q.a;
        detail::add_closed(lp, cur, i);
        lp.add_le(q.a, q.b + 1.0);
        const LpResult r = solve_lp(lp);
        const double scale = std::max(1.0, std::abs(q.b));
        if (r.status == LpStatus::optimal && r.value <= q.b + 1e-9 * scale) {
            std::vector<Inequality> rest(cur.inequalities());
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
            cur = Polyhedron(cur.dim(), rest);
        } else {
            ++i;
        }
    }
    return cur;
}

/// Invariance dimension: dim of the translation stabiliser; nullopt stands for -infinity.
inline std::optional<int> invdim(const Polyhedron& p) {
    if (is_empty(p)) return std::nullopt;
    const Polyhedron r = remove_redundant(p);
    if (r.size() == 0) return p.dim();
    return p.dim() - matrix_rank<double>(r.normals(), 1e-10);
}

/// Orthonormal basis (columns) of the stabiliser {d : a_i . d = 0}.
inline Mat lineality_basis(const Polyhedron& p) {
    const Polyhedron r = remove_redundant(p);
    if (r.size() == 0) return Mat::Identity(p.dim(), p.dim());
    Eigen::JacobiSVD<Mat> svd(r.normals(), Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, s.size() ? s(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++rank;
    return svd.matrixV().rightCols(p.dim() - rank);
}

/// Whether the projection of P along its stabiliser is bounded.
inline bool quotient_bounded(const Polyhedron& p) {
    if (is_empty(p)) return true;
    const int n = p.dim();
    const Mat lin = lineality_basis(p);
    Mat perp;  // basis of the orthogonal complement
    {
        Eigen::FullPivHouseholderQR<Mat> qr(lin.cols() ? lin : Mat(Mat::Zero(n, 1)));
        Mat q = qr.matrixQ();
        perp = lin.cols() ? Mat(q.rightCols(n - lin.cols())) : Mat(Mat::Identity(n, n));
    }
    for (Eigen::Index j = 0; j < perp.cols(); ++j)
        for (double sign : {1.0, -1.0}) {
            LinearProgram lp(n);
            lp.objective = sign * perp.col(j);
            detail::add_closed(lp, p);
            for (Eigen::Index c = 0; c < lin.cols(); ++c) lp.add_eq(lin.col(c), 0.0);
            if (solve_lp(lp).status != LpStatus::optimal) return false;
        }
    return true;
}

/// invdim(P) if the quotient by the stabiliser is bounded, else -infinity (nullopt).
inline std::optional<int> deg(const Polyhedron& p) {
    auto d = invdim(p);
    if (!d || !quotient_bounded(p)) return std::nullopt;
    return d;
}

inline std::string dim_string(const std::optional<int>& d) { return d ? std::to_string(*d) : "-inf"; }

struct EscapeFunctional {
    Vec phi;
    double cone_min_linf = 0.0;           // min of the unscaled functional on the recession cone's l_inf sphere
    std::vector<double> checked_levels;   // r with {x in P : phi(x) < r} verified bounded
};

/// Linear functional phi with phi(d) > 1 on the unit directions of the recession
/// cone C = {d : a_i . d <= 0}, so every sublevel set {x in P : phi(x) < r} is bounded.
/// Built as phi = -sum a_i / |a_i| (positive on C minus 0 since C is pointed), then
/// scaled by 2 sqrt(n) / m with m its minimum over C intersected with the l_inf unit sphere.
inline EscapeFunctional escape_functional(const Polyhedron& p) {
    if (is_empty(p)) throw InputError("escape functional of an empty polyhedron");
    if (invdim(p).value_or(0) != 0) throw InputError("escape functional needs invariance dimension 0");
    if (quotient_bounded(p)) throw InputError("escape functional needs an unbounded polyhedron");
    const int n = p.dim();
    const Polyhedron r = remove_redundant(p);
    Vec phi = Vec::Zero(n);
    for (const auto& q : r.inequalities()) phi -= q.a / q.a.norm();

    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
        for (double sign : {1.0, -1.0}) {
            LinearProgram lp(n);
            lp.objective = -phi;
            for (const auto& q : r.inequalities()) lp.add_le(q.a, 0.0);
            lp.add_eq(Vec::Unit(n, j), sign);
            for (int i = 0; i < n; ++i) lp.add_bounds(i, -1.0, 1.0);
            const LpResult res = solve_lp(lp);
            if (res.status == LpStatus::optimal) m = std::min(m, -res.value);
        }
    if (!(m > 1e-12) || !std::isfinite(m)) throw IntegrityError("recession cone is not pointed");

    EscapeFunctional out;
    out.cone_min_linf = m;
    out.phi = phi * (2 * std::sqrt(static_cast<double>(n)) / m);
    for (double level : {1.0, 10.0, 100.0}) {
        for (int j = 0; j < n; ++j)
            for (double sign : {1.0, -1.0}) {
                LinearProgram lp(n);
                lp.objective = sign * Vec::Unit(n, j);
                detail::add_closed(lp, p);
                lp.add_le(out.phi, level);
                if (solve_lp(lp).status == LpStatus::unbounded)
                    throw IntegrityError("escape functional has an unbounded sublevel set");
            }
        out.checked_levels.push_back(level);
    }
    return out;
}

/// Whether closed P lies in closed Q (for nonempty open sets: P subset of Q).
inline bool contained_in(const Polyhedron& p, const Polyhedron& q) {
    if (p.dim() != q.dim()) throw InputError("polyhedra of different dimension");
    if (is_empty(p)) return true;
    for (const auto& ineq : q.inequalities()) {
        LinearProgram lp(p.dim());
        lp.objective = ineq.a;
        detail::add_closed(lp, p);
        const LpResult r = solve_lp(lp);
        if (r.status != LpStatus::optimal || r.value > ineq.b + 1e-9 * std::max(1.0, std::abs(ineq.b))) return false;
    }
    return true;
}

struct MonotonicityCheck {
    std::optional<int> inner;
    std::optional<int> outer;
    bool holds = false;
};

/// For P subset of Q, compares invdim P <= invdim Q.
inline MonotonicityCheck invdim_monotonicity_check(const Polyhedron& p, const Polyhedron& q) {
    if (!contained_in(p, q)) throw InputError("first polyhedron is not contained in the second");
    MonotonicityCheck c{invdim(p), invdim(q), false};
    c.holds = !c.inner || (c.outer && *c.inner <= *c.outer);
    return c;
}

struct CoverViolation {
    std::vector<int> indices;  // 0-based members of the family
    int invdim = 0;
    int bound = 0;             // n - k
};

struct CoverReport {
    int n = 0;
    int depth = 0;
    std::size_t family_size = 0;
    std::size_t subsets_checked = 0;
    std::vector<std::size_t> nonempty_by_size;     // index k: nonempty k-fold intersections
    std::vector<CoverViolation> violations;
    std::optional<std::vector<int>> n_plus_one;    // an (n+1)-subset with nonempty intersection
    bool incomplete = false;
    std::vector<std::string> warnings;

    bool hypotheses_hold() const { return violations.empty() && !incomplete; }
};

/// For each k <= min(depth, n) and each k-subset with nonempty intersection, compares the
/// invariance dimension of the intersection with n - k (the intersection contains
/// the convex hull condition's set, so its invdim bounds it from above); separately
/// looks for n + 1 members with a common point. Empty intersections are not extended.
inline CoverReport cover_condition_check(const std::vector<Polyhedron>& family, int n, int depth,
                                         std::size_t subset_cap = 200'000) {
    CoverReport rep;
    rep.n = n;
    rep.family_size = family.size();
    for (const auto& p : family)
        if (p.dim() != n) throw InputError("cover member has the wrong dimension");
    if (depth < 0) throw InputError("depth must be nonnegative");
    if (static_cast<std::size_t>(depth) > family.size()) {
        rep.warnings.push_back("depth " + std::to_string(depth) + " clamped to family size " +
                               std::to_string(family.size()));
        depth = static_cast<int>(family.size());
    }
    rep.depth = depth;
    const int reach = std::min<int>(std::max(depth, n + 1), static_cast<int>(family.size()));
    rep.nonempty_by_size.assign(static_cast<std::size_t>(reach) + 1, 0);

    std::vector<int> chosen;
    auto recurse = [&](auto&& self, std::size_t from, const std::optional<Polyhedron>& acc) -> void {
        for (std::size_t i = from; i < family.size(); ++i) {
            if (rep.subsets_checked >= subset_cap) {
                rep.incomplete = true;
                return;
            }
            ++rep.subsets_checked;
            Polyhedron cur = acc ? acc->intersect(family[i]) : family[i];
            if (is_empty(cur)) continue;
            chosen.push_back(static_cast<int>(i));
            const int k = static_cast<int>(chosen.size());
            ++rep.nonempty_by_size[static_cast<std::size_t>(k)];
            if (k <= depth && k <= n) {
                const int d = *invdim(cur);
                if (d > n - k) rep.violations.push_back({chosen, d, n - k});
            }
            if (k == n + 1 && !rep.n_plus_one) rep.n_plus_one = chosen;
            if (k < reach) self(self, i + 1, cur);
            chosen.pop_back();
        }
    };
    recurse(recurse, 0, std::nullopt);
    if (rep.incomplete) rep.warnings.push_back("subset cap reached; report is partial");
    return rep;
}

}  // namespace orbitlat
