#pragma once

// Grayson profiles, Harder-Narasimhan filtrations, stability, and measured flags.

#include "orbitlat/mincov.hpp"

#include <Eigen/SVD>

#include <numeric>

namespace orbitlat {

struct ProfilePoint {
    int rank = 0;
    double min_log_cov = 0.0;
    bool is_vertex = false;
};

struct GraysonProfile {
    std::vector<ProfilePoint> points;   // ranks 0..n
    std::vector<int> vertex_ranks;      // increasing, contains 0 and n
    std::vector<MinCovolumeResult> minimizers;  // per rank
};

/// Lower-hull vertices of (i, y[i]) with a depth tolerance: recursively split each
/// chord at its deepest point, keeping the point only if it lies more than `tol`
/// below the chord. Returned indices are increasing and include both endpoints.
inline std::vector<int> lower_hull_vertices(const std::vector<double>& y, double tol) {
    const int last = static_cast<int>(y.size()) - 1;
    std::vector<int> out{0};
    auto split = [&](auto&& self, int a, int b) -> void {
        int best = -1;
        double depth = tol;
        for (int i = a + 1; i < b; ++i) {
            const double chord = y[a] + (y[b] - y[a]) * static_cast<double>(i - a) / (b - a);
            if (chord - y[i] > depth) {
                depth = chord - y[i];
                best = i;
            }
        }
        if (best < 0) return;
        self(self, a, best);
        out.push_back(best);
        self(self, best, b);
    };
    if (last > 0) {
        split(split, 0, last);
        out.push_back(last);
    }
    return out;
}

inline GraysonProfile grayson_profile(const Lattice& l, double tol = kDefaultTol, const MinCovolumeOptions& opts = {}) {
    const int n = l.dim();
    ShortVectorEnumerator en(l);
    MinimaResult euclid = successive_minima(en, NormSpec::euclidean(), opts.enumeration);
    GraysonProfile p;
    std::vector<double> y;
    for (int k = 0; k <= n; ++k) {
        p.minimizers.push_back(minimal_covolume_sublattice(en, euclid, k, opts));
        y.push_back(std::log(p.minimizers.back().covolume));
        p.points.push_back({k, y.back(), false});
    }
    p.vertex_ranks = lower_hull_vertices(y, tol);
    for (int v : p.vertex_ranks) p.points[v].is_vertex = true;
    return p;
}

struct HNFiltration {
    std::vector<Sublattice> chain;    // {0} = G_0 < ... < G_m = lattice
    std::vector<double> covolumes;
    GraysonProfile profile;

    bool trivial() const { return chain.size() == 2; }
    std::vector<int> ranks() const {
        std::vector<int> r;
        for (const auto& g : chain) r.push_back(g.rank());
        return r;
    }
};

/// Chain of the unique minimizers at the profile vertices. Ties at a vertex or a
/// non-nested chain raise IntegrityError.
inline HNFiltration hn_filtration(const Lattice& l, double tol = kDefaultTol, const MinCovolumeOptions& opts = {}) {
    HNFiltration f;
    f.profile = grayson_profile(l, tol, opts);
    for (int r : f.profile.vertex_ranks) {
        const auto& m = f.profile.minimizers[r];
        if (!m.ties.empty())
            throw IntegrityError("minimal-covolume subgroup at vertex rank " + std::to_string(r) + " is not unique");
        f.chain.push_back(m.best);
        f.covolumes.push_back(m.covolume);
    }
    for (std::size_t i = 0; i + 1 < f.chain.size(); ++i)
        if (!f.chain[i].contained_in(f.chain[i + 1]))
            throw IntegrityError("Harder-Narasimhan minimizers are not nested");
    return f;
}

struct StabilityReport {
    bool stable = true;
    double margin = 0.0;                 // min over proper ranks of (log cov - chord), ~ min log cov
    std::optional<Sublattice> witness;   // destabilizing subgroup when not stable
    double witness_covolume = 1.0;
    GraysonProfile profile;
};

/// Stable iff every proper-rank minimal log-covolume is within tol of the chord from
/// (0, 0) to (n, log|det|); for unimodular lattices the chord is the axis.
/// Uses the same depth test as the profile hull, so it agrees with hn_filtration triviality.
inline StabilityReport is_stable(const Lattice& l, double tol = kDefaultTol, const MinCovolumeOptions& opts = {}) {
    StabilityReport rep;
    rep.profile = grayson_profile(l, tol, opts);
    const int n = l.dim();
    const double top = rep.profile.points[n].min_log_cov;
    rep.margin = std::numeric_limits<double>::infinity();
    int worst = -1;
    for (int k = 1; k < n; ++k) {
        const double rel = rep.profile.points[k].min_log_cov - top * k / n;
        if (rel < rep.margin) {
            rep.margin = rel;
            worst = k;
        }
    }
    if (n == 1) rep.margin = 0.0;
    rep.stable = rep.profile.vertex_ranks.size() == 2;
    if (!rep.stable && worst > 0) {
        rep.witness = rep.profile.minimizers[worst].best;
        rep.witness_covolume = rep.profile.minimizers[worst].covolume;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Measured flags

/// Chain 0 < V_1 < ... < V_m < R^n; only proper nonzero members are stored.
struct MeasuredFlag {
    int n = 0;
    std::vector<MeasuredSubspace<double>> members;
    std::vector<Sublattice> lattices;  // the sublattice measuring each member, when lattice-derived

    bool trivial() const { return members.empty(); }

    /// max over proper members of the MS norm; 1 for the trivial flag.
    double norm() const {
        if (members.empty()) return 1.0;
        double best = 0.0;
        for (const auto& m : members) best = std::max(best, m.norm());
        return best;
    }

    std::vector<int> dims() const {
        std::vector<int> d;
        for (const auto& m : members) d.push_back(m.dim());
        return d;
    }
};

/// Flag of spans of lattice vectors of norm < r as r grows; each member is measured by
/// the saturated sublattice it contains. Breakpoints are the distinct minima (relative tol).
inline MeasuredFlag minkowski_flag(const Lattice& l, const NormSpec& norm, double tol = kDefaultTol,
                                   const EnumerationOptions& opts = {}) {
    const int n = l.dim();
    MinimaResult m = successive_minima(l, norm, opts);
    MeasuredFlag f;
    f.n = n;
    for (int i = 0; i + 1 < n; ++i) {
        // close a member after the last minimum of each block of tied values
        if (m.values[i + 1] <= m.values[i] * (1 + tol)) continue;
        IMat gens(n, i + 1);
        for (int j = 0; j <= i; ++j) gens.col(j) = m.witnesses[j].coeffs;
        Sublattice g = saturate(Sublattice(l, gens));
        f.members.emplace_back(g.vectors());
        f.lattices.push_back(std::move(g));
    }
    return f;
}

/// Upper bound C_n on the Minkowski flag norm for unimodular lattices under `norm`.
/// A member of dimension m is spanned by minima witnesses, so its covolume (which
/// dominates the MS norm) is at most prod_{i<=m} |v_i|_2 <= prod lambda_i / c_low^m,
/// and by Minkowski's second theorem prod_{i<=m} lambda_i <= (2^n / vol B_N)^{m/n}.
inline double minkowski_flag_bound(int n, const NormSpec& norm) {
    const double ratio = std::max(1.0, std::pow(2.0, n) / norm.unit_ball_volume(n));
    double best = 1.0;
    for (int m = 1; m < n; ++m)
        best = std::max(best, std::pow(ratio, static_cast<double>(m) / n) / std::pow(norm.c_low(n), m));
    return best;
}

struct FlagBoundCheck {
    double flag_norm = 1.0;
    double bound = 1.0;
    MeasuredFlag flag;
};

inline FlagBoundCheck flag_norm_bound_check(const Lattice& l, const NormSpec& norm, double tol = kDefaultTol) {
    if (!l.is_unimodular(1e-6)) throw InputError("flag norm bound check needs a unimodular lattice");
    FlagBoundCheck r;
    r.flag = minkowski_flag(l, norm, tol);
    r.flag_norm = r.flag.norm();
    r.bound = minkowski_flag_bound(l.dim(), norm);
    if (r.flag_norm > r.bound * (1 + tol))
        throw IntegrityError("Minkowski flag norm " + std::to_string(r.flag_norm) + " exceeds the bound " +
                             std::to_string(r.bound));
    return r;
}

// ---------------------------------------------------------------------------
// Support permutation

/// sigma as a 1-based table: sigma[i-1] = sigma(i).
using Permutation = std::vector<int>;

inline IndexSet permutation_prefix(const Permutation& sigma, int d) {
    std::vector<int> m(sigma.begin(), sigma.begin() + d);
    std::sort(m.begin(), m.end());
    return IndexSet(static_cast<int>(sigma.size()), std::move(m));
}

/// Checks sigma({1..dim V}) in supp V for every member (given by basis matrices).
inline bool satisfies_support_property(const Permutation& sigma, const std::vector<Mat>& chain,
                                       double tol = kDefaultTol) {
    for (const auto& b : chain) {
        if (b.cols() == 0 || b.cols() == b.rows()) continue;
        auto s = support_of_subspace<double>(b, tol);
        if (!s.count(permutation_prefix(sigma, static_cast<int>(b.cols())))) return false;
    }
    return true;
}

/// Permutation with sigma([dim v_i]) in supp v_i for each member of a strictly
/// increasing chain of subspaces (bases as columns). Refines the chain to a full
/// flag, then at stage k takes a kernel vector of the projection onto J = sigma([k])
/// restricted to v_{k+1} and adds its largest coordinate outside J.
inline Permutation flag_support_permutation(const std::vector<Mat>& chain, double tol = kDefaultTol) {
    if (chain.empty()) throw InputError("empty flag");
    const Eigen::Index n = chain.front().rows();
    Mat w(n, 0);
    auto try_extend = [&](const Vec& v) {
        Mat cand(n, w.cols() + 1);
        cand << w, v;
        if (matrix_rank<double>(cand, tol) == cand.cols()) w = std::move(cand);
    };
    Eigen::Index prev_dim = 0;
    for (const auto& b : chain) {
        if (b.rows() != n) throw InputError("flag members live in different dimensions");
        if (b.cols() == 0) continue;
        if (b.cols() <= prev_dim) throw InputError("flag dimensions must be strictly increasing");
        for (Eigen::Index j = 0; j < b.cols(); ++j) try_extend(b.col(j));
        Mat both(n, w.cols() + b.cols());
        both << w, b;
        if (w.cols() != b.cols() || matrix_rank<double>(both, tol) != b.cols())
            throw InputError("flag members are not nested subspaces of the stated dimensions");
        prev_dim = b.cols();
    }
    for (Eigen::Index i = 0; i < n && w.cols() < n; ++i) try_extend(Vec::Unit(n, i));

    Permutation sigma;
    std::vector<bool> used(n, false);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Mat sub = w.leftCols(k + 1);
        Vec c;
        if (k == 0) {
            c = Vec::Ones(1);
        } else {
            Mat proj(k, k + 1);
            for (Eigen::Index r = 0; r < k; ++r) proj.row(r) = sub.row(sigma[r] - 1);
            Eigen::JacobiSVD<Mat> svd(proj, Eigen::ComputeFullV);
            c = svd.matrixV().col(k);
        }
        const Vec v = sub * c;
        Eigen::Index arg = -1;
        double best = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!used[j] && std::abs(v(j)) > best) {
                best = std::abs(v(j));
                arg = j;
            }
        if (arg < 0 || best <= tol * v.norm())
            throw IntegrityError("projection kernel vector vanishes outside J; flag is numerically degenerate");
        used[arg] = true;
        sigma.push_back(static_cast<int>(arg) + 1);
    }
    return sigma;
}

}  // namespace orbitlat
