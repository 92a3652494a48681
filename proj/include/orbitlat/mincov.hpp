#pragma once

#include "orbitlat/minima.hpp"

#include <map>
#include <sstream>

namespace orbitlat {

struct MinCovolumeOptions {
    EnumerationOptions enumeration;
    /// Relative tolerance under which two covolumes count as tied.
    double tie_tol = kDefaultTol;
    /// When set, also collect every saturated subgroup with covolume <= this value.
    std::optional<double> collect_below;
    /// When set, also collect every saturated subgroup within this factor of the minimum.
    std::optional<double> collect_ratio;
    std::size_t collect_cap = 512;
};

/// Why the returned subgroup is minimal: any rank-k subgroup with covolume <= bound
/// is generated (up to saturation) by k independent vectors of length <= radius.
struct CovolumeCertificate {
    int rank = 0;
    std::vector<double> euclidean_minima;  // lambda_1..lambda_k of the parent
    double initial_covolume = 0.0;         // saturation of the first k minima witnesses
    double covolume_bound = 0.0;           // largest covolume searched for
    double minkowski_constant = 0.0;       // 2^k / V_k
    double radius = 0.0;
    std::size_t vectors_enumerated = 0;
    std::size_t tuples_examined = 0;
    bool certified = false;
    std::string derivation;
};

struct CovolumeEntry {
    Sublattice group;
    double covolume;
};

struct MinCovolumeResult {
    Sublattice best;
    double covolume = 1.0;
    std::optional<Rational> covolume_squared;  // exact, rational mode only
    std::vector<Sublattice> ties;              // other minimizers within tie_tol (excluding best)
    std::vector<CovolumeEntry> collected;      // subgroups under collect_below, sorted by covolume
    CovolumeCertificate certificate;
};

/// Thrown when the enumeration cap is hit; carries the best subgroup found so far.
class CovolumeSearchExhausted : public ResourceError {
public:
    CovolumeSearchExhausted(const ResourceError& e, MinCovolumeResult partial)
        : ResourceError(e.what(), e.cap()), partial_(std::move(partial)) {}
    const MinCovolumeResult& partial() const { return partial_; }

private:
    MinCovolumeResult partial_;
};

namespace detail {

inline std::vector<std::int64_t> flatten(const IMat& m) {
    std::vector<std::int64_t> out(m.data(), m.data() + m.size());
    out.push_back(m.rows());
    return out;
}

inline bool lex_less(const IMat& a, const IMat& b) {
    // column-major order: compare generator by generator
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace detail

/// Minimal-covolume rank-k subgroup using a shared enumerator and precomputed
/// Euclidean minima of the parent.
inline MinCovolumeResult minimal_covolume_sublattice(const ShortVectorEnumerator& en, const MinimaResult& euclid,
                                                     int k, const MinCovolumeOptions& opts = {}) {
    const Lattice& l = en.lattice();
    const int n = l.dim();
    if (k < 0 || k > n) throw InputError("sublattice rank out of range");

    auto trivial_result = [&](Sublattice g) {
        MinCovolumeResult r{g, covolume(g), covolume_squared_exact(g), {}, {}, {}};
        r.certificate.rank = k;
        r.certificate.certified = true;
        r.certificate.initial_covolume = r.covolume;
        r.certificate.covolume_bound = r.covolume;
        r.certificate.derivation = k == 0 ? "rank 0: the trivial subgroup, covolume 1 by convention"
                                          : "rank n: the only full-rank saturated subgroup is the lattice itself";
        if ((opts.collect_below && r.covolume <= *opts.collect_below) || opts.collect_ratio)
            r.collected.push_back({g, r.covolume});
        return r;
    };
    if (k == 0) return trivial_result(Sublattice::trivial(l));
    if (k == n) return trivial_result(Sublattice::whole(l));

    IMat first(n, k);
    for (int i = 0; i < k; ++i) first.col(i) = euclid.witnesses[i].coeffs;
    Sublattice start = saturate(Sublattice(l, first));

    const bool exact = l.has_exact();
    MinCovolumeResult res{start, covolume(start), covolume_squared_exact(start), {}, {}, {}};
    CovolumeCertificate& cert = res.certificate;
    cert.rank = k;
    cert.euclidean_minima.assign(euclid.values.begin(), euclid.values.begin() + k);
    cert.initial_covolume = res.covolume;
    cert.minkowski_constant = std::pow(2.0, k) / unit_ball_volume(k);

    double lower_prod = 1.0;  // lambda_1 ... lambda_{k-1}
    for (int i = 0; i + 1 < k; ++i) lower_prod *= euclid.values[i];

    auto search_bound = [&] {
        return std::max({res.covolume * (1 + opts.tie_tol) + 1e-300, opts.collect_below.value_or(0.0),
                         res.covolume * opts.collect_ratio.value_or(0.0)});
    };
    const double bound0 = search_bound();
    cert.covolume_bound = bound0;
    cert.radius = cert.minkowski_constant * bound0 / lower_prod * (1 + 1e-9);
    {
        std::ostringstream os;
        os << "Minkowski's second theorem for a rank-" << k << " subgroup G gives lambda_1(G)...lambda_k(G) <= (2^k/V_k) cov G; "
           << "since lambda_i(G) >= lambda_i(parent), any G with cov G <= " << bound0
           << " has lambda_k(G) <= (2^k/V_k) * " << bound0 << " / (lambda_1...lambda_{k-1}) = " << cert.radius
           << "; G is the saturation of its successive-minima vectors, all enumerated within that radius, "
           << "and their norms multiply to at most (2^k/V_k) cov G";
        cert.derivation = os.str();
    }

    std::vector<LatticeVector> vs;
    try {
        vs = en.within(cert.radius, opts.enumeration);
    } catch (const ResourceError& e) {
        cert.certified = false;
        throw CovolumeSearchExhausted(e, res);
    }
    cert.vectors_enumerated = vs.size();

    struct Seen {
        double cov;
        std::optional<Rational> cov_sq;
        IMat canon;
    };
    std::map<std::vector<std::int64_t>, Seen> seen;
    auto better = [&](const Seen& s) {
        if (exact) {
            if (*s.cov_sq != *res.covolume_squared) return *s.cov_sq < *res.covolume_squared;
        } else if (std::abs(s.cov - res.covolume) > opts.tie_tol * res.covolume) {
            return s.cov < res.covolume;
        }
        return detail::lex_less(s.canon, res.best.canonical());
    };
    {
        IMat canon = start.canonical();
        seen.emplace(detail::flatten(canon), Seen{res.covolume, res.covolume_squared, canon});
    }

    std::vector<std::size_t> pick(k);
    std::vector<IntegerSpan> spans(k + 1, IntegerSpan(n));
    const double kminus = cert.minkowski_constant;

    auto recurse = [&](auto&& self, int depth, std::size_t from, double prod) -> void {
        for (std::size_t i = from; i < vs.size(); ++i) {
            const double len = vs[i].norm;
            if (len < euclid.values[depth] * (1 - 1e-9)) continue;
            // remaining k-depth vectors are at least this long
            const double need = prod * std::pow(len, k - depth);
            if (need > kminus * search_bound() * (1 + 1e-9)) break;
            spans[depth + 1] = spans[depth];
            if (!spans[depth + 1].try_add(vs[i].coeffs)) continue;
            pick[depth] = i;
            if (depth + 1 < k) {
                self(self, depth + 1, i + 1, prod * len);
                continue;
            }
            ++cert.tuples_examined;
            IMat gens(n, k);
            for (int m = 0; m < k; ++m) gens.col(m) = vs[pick[m]].coeffs;
            IMat canon = saturate_columns(gens);
            auto key = detail::flatten(canon);
            if (seen.count(key)) continue;
            Sublattice g(l, canon);
            Seen s{covolume(g), exact ? covolume_squared_exact(g) : std::nullopt, canon};
            seen.emplace(std::move(key), s);
            if (better(s)) {
                res.best = g;
                res.covolume = s.cov;
                res.covolume_squared = s.cov_sq;
            }
        }
    };
    recurse(recurse, 0, 0, 1.0);

    const IMat best_canon = res.best.canonical();
    for (const auto& [key, s] : seen) {
        const bool same = s.canon == best_canon;
        const bool tied = exact ? (*s.cov_sq == *res.covolume_squared)
                                : std::abs(s.cov - res.covolume) <= opts.tie_tol * res.covolume;
        if (tied && !same) res.ties.emplace_back(l, s.canon);
        if ((opts.collect_below && s.cov <= *opts.collect_below) ||
            (opts.collect_ratio && s.cov <= res.covolume * *opts.collect_ratio))
            res.collected.push_back({Sublattice(l, s.canon), s.cov});
    }
    std::sort(res.collected.begin(), res.collected.end(),
              [](const CovolumeEntry& a, const CovolumeEntry& b) { return a.covolume < b.covolume; });
    if (res.collected.size() > opts.collect_cap) res.collected.erase(res.collected.begin() + static_cast<std::ptrdiff_t>(opts.collect_cap), res.collected.end());
    res.best = Sublattice(l, best_canon);
    cert.certified = true;
    return res;
}

inline MinCovolumeResult minimal_covolume_sublattice(const Lattice& l, int k, const MinCovolumeOptions& opts = {}) {
    ShortVectorEnumerator en(l);
    MinimaResult m = successive_minima(en, NormSpec::euclidean(), opts.enumeration);
    return minimal_covolume_sublattice(en, m, k, opts);
}

}  // namespace orbitlat
