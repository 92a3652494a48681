#pragma once

#include "orbitlat/enumeration.hpp"

namespace orbitlat {

struct MinimaResult {
    std::vector<double> values;             // lambda_1 <= ... <= lambda_n in the chosen norm
    std::vector<LatticeVector> witnesses;   // N(witnesses[i].vec) == values[i], independent
    double euclidean_radius = 0.0;          // radius of the final enumeration
};

/// Successive minima under N. All vectors with N(v) <= t lie in the Euclidean ball of
/// radius t / c_low, so once n independent vectors with N <= t are found the
/// greedy choice over that ball is complete.
inline MinimaResult successive_minima(const ShortVectorEnumerator& en, const NormSpec& norm,
                                      const EnumerationOptions& opts = {}) {
    const Lattice& l = en.lattice();
    const int n = l.dim();
    const double c_low = norm.c_low(n);

    double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
    for (Eigen::Index j = 0; j < en.reduction().reduced.cols(); ++j) {
        const double v = norm(en.reduction().reduced.col(j));
        t_min = std::min(t_min, v);
        t_max = std::max(t_max, v);
    }

    for (double t = t_min;; t = std::min(2 * t, t_max)) {
        const double radius = t / c_low;
        auto vs = en.within(radius, opts);
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(vs.size());
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const double nv = norm.kind() == NormKind::euclidean ? vs[i].norm : norm(vs[i].vec);
            if (nv <= t * (1 + 1e-12)) order.emplace_back(nv, i);
        }
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        MinimaResult res;
        res.euclidean_radius = radius;
        IntegerSpan span(n);
        for (const auto& [nv, i] : order) {
            if (!span.try_add(vs[i].coeffs)) continue;
            res.values.push_back(nv);
            res.witnesses.push_back(vs[i]);
            if (span.dim() == n) return res;
        }
        if (t >= t_max) throw IntegrityError("successive minima search failed to find a full-rank set");
    }
}

inline MinimaResult successive_minima(const Lattice& l, const NormSpec& norm, const EnumerationOptions& opts = {}) {
    return successive_minima(ShortVectorEnumerator(l), norm, opts);
}

/// lambda_n / lambda_1 <= 1 + tol
inline bool is_well_rounded(const Lattice& l, const NormSpec& norm, double tol = kDefaultTol,
                            const EnumerationOptions& opts = {}) {
    auto m = successive_minima(l, norm, opts);
    return m.values.back() / m.values.front() <= 1 + tol;
}

}  // namespace orbitlat
