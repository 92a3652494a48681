#pragma once

// Search of the diagonal orbit {diag(exp x) L : sum x = 0} for stable and
// well-rounded points.

#include "orbitlat/filtration.hpp"
#include "orbitlat/lp.hpp"

#include <chrono>
#include <deque>
#include <future>
#include <stop_token>
#include <thread>

namespace orbitlat {

/// A point x of the trace-zero hyperplane, standing for diag(exp x_1, ..., exp x_n).
class DiagCoord {
public:
    explicit DiagCoord(Vec x) : x_(std::move(x)) {
        if (x_.size() == 0) throw InputError("empty diagonal coordinate");
        x_.array() -= x_.mean();
    }

    static DiagCoord zero(int n) { return DiagCoord(Vec::Zero(n)); }

    /// x = (y_1, ..., y_{n-1}, -sum y)
    static DiagCoord from_reduced(const Vec& y) {
        Vec x(y.size() + 1);
        x.head(y.size()) = y;
        x(y.size()) = -y.sum();
        return DiagCoord(std::move(x));
    }

    const Vec& x() const { return x_; }
    int dim() const { return static_cast<int>(x_.size()); }
    Vec reduced() const { return x_.head(x_.size() - 1); }
    bool is_zero() const { return x_.isZero(0.0); }

private:
    Vec x_;
};

/// d x / d y for the reduced parametrisation: [I; -1^T], n x (n-1).
inline Mat reduced_map(int n) {
    Mat m = Mat::Zero(n, n - 1);
    m.topRows(n - 1).setIdentity();
    m.row(n - 1).setConstant(-1.0);
    return m;
}

/// Box in reduced coordinates y in R^{n-1}.
struct TraceZeroBox {
    Vec lo;
    Vec hi;

    static TraceZeroBox around(const Vec& center, double radius) {
        return {center.array() - radius, center.array() + radius};
    }
    Vec center() const { return 0.5 * (lo + hi); }
    Eigen::Index dims() const { return lo.size(); }

    std::vector<Vec> corners() const {
        const Eigen::Index d = dims();
        std::vector<Vec> out;
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            Vec c(d);
            for (Eigen::Index i = 0; i < d; ++i) c(i) = (mask >> i) & 1 ? hi(i) : lo(i);
            out.push_back(std::move(c));
        }
        return out;
    }
};

/// Rows of the basis scaled by exp(x_i); the determinant is unchanged.
inline Lattice apply_diag(const DiagCoord& x, const Lattice& l) {
    if (x.dim() != l.dim()) throw InputError("diagonal coordinate dimension does not match the lattice");
    if (x.is_zero()) return l;
    return Lattice(Mat(x.x().array().exp().matrix().asDiagonal() * l.basis()));
}

// ---------------------------------------------------------------------------
// Closed-form models along the orbit

/// x -> log cov(exp(x) G) for a fixed subgroup G, from its Plücker coordinates
/// c_J in the unscaled lattice: (1/2) log sum_J c_J^2 exp(2 psi_J(x)).
class SubgroupModel {
public:
    explicit SubgroupModel(const Sublattice& g) : group_(g), n_(g.parent().dim()) {
        const KVector<double> p = g.plucker();
        for (const auto& [j, c] : p.coords()) {
            if (c == 0.0) continue;
            std::vector<int> idx;
            for (int m : j.members()) idx.push_back(m - 1);
            terms_.push_back({std::move(idx), std::log(std::abs(c))});
        }
        if (terms_.empty()) throw IntegrityError("subgroup with vanishing Plücker vector");
    }

    const Sublattice& group() const { return group_; }
    int rank() const { return group_.rank(); }

    double log_covolume(const Vec& x) const {
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> e(terms_.size());
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            e[t] = 2 * exponent(t, x);
            mx = std::max(mx, e[t]);
        }
        double s = 0.0;
        for (double v : e) s += std::exp(v - mx);
        return 0.5 * (mx + std::log(s));
    }

    Vec gradient(const Vec& x) const {
        std::vector<double> e(terms_.size());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            e[t] = 2 * exponent(t, x);
            mx = std::max(mx, e[t]);
        }
        double s = 0.0;
        for (double& v : e) s += (v = std::exp(v - mx));
        Vec g = Vec::Zero(n_);
        for (std::size_t t = 0; t < terms_.size(); ++t)
            for (int i : terms_[t].indices) g(i) += e[t] / s;
        return g;
    }

    /// log of the max-coordinate norm of the scaled Plücker vector.
    double log_ms_norm(const Vec& x) const {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < terms_.size(); ++t) mx = std::max(mx, exponent(t, x));
        return mx;
    }

private:
    struct Term {
        std::vector<int> indices;
        double log_abs;
    };

    double exponent(std::size_t t, const Vec& x) const {
        double s = terms_[t].log_abs;
        for (int i : terms_[t].indices) s += x(i);
        return s;
    }

    Sublattice group_;
    int n_;
    std::vector<Term> terms_;
};

struct BoxMinimum {
    Vec argmin;
    double value;
    double lower_bound;  // rigorous for convex f: f(y*) + min over the box of grad . (y - y*)
};

/// Projected gradient descent for a smooth convex function on a box.
template <typename F, typename G>
BoxMinimum minimize_on_box(F&& f, G&& grad, const TraceZeroBox& box, Vec y) {
    auto clamp = [&](Vec v) { return Vec(v.cwiseMax(box.lo).cwiseMin(box.hi)); };
    y = clamp(std::move(y));
    double fy = f(y);
    double step = 1.0;
    for (int it = 0; it < 2000; ++it) {
        const Vec g = grad(y);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec cand = clamp(y - step * g);
            const double fc = f(cand);
            if (fc <= fy - 1e-4 * g.dot(y - cand)) {
                moved = (cand - y).lpNorm<Eigen::Infinity>() > 1e-13;
                y = std::move(cand);
                fy = fc;
                step = std::min(step * 2, 1e3);
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    const Vec g = grad(y);
    double lb = fy;
    for (Eigen::Index i = 0; i < y.size(); ++i) lb += std::min(g(i) * (box.lo(i) - y(i)), g(i) * (box.hi(i) - y(i)));
    return {y, fy, lb};
}

// ---------------------------------------------------------------------------
// Margins

namespace detail {

inline double chord_slope(const Lattice& l) { return std::log(std::abs(l.det())) / l.dim(); }

struct StabilityPoint {
    Vec x;
    double margin = 0.0;
    std::vector<MinCovolumeResult> per_rank;  // ranks 1..n-1
    std::vector<SubgroupModel> active;        // subgroups within `slack` of the margin
};

inline StabilityPoint evaluate_stability(const Lattice& l, const Vec& x, double slack, const MinCovolumeOptions& base) {
    const int n = l.dim();
    StabilityPoint p;
    p.x = x;
    p.margin = std::numeric_limits<double>::infinity();
    if (n == 1) {
        p.margin = 0.0;
        return p;
    }
    const Lattice scaled = apply_diag(DiagCoord(x), l);
    ShortVectorEnumerator en(scaled);
    MinimaResult euclid = successive_minima(en, NormSpec::euclidean(), base.enumeration);
    MinCovolumeOptions opts = base;
    if (slack > 0) opts.collect_ratio = std::exp(slack);
    const double slope = chord_slope(l);
    for (int k = 1; k < n; ++k) {
        p.per_rank.push_back(minimal_covolume_sublattice(en, euclid, k, opts));
        p.margin = std::min(p.margin, std::log(p.per_rank.back().covolume) - k * slope);
    }
    if (slack > 0) {
        for (int k = 1; k < n; ++k)
            for (const auto& e : p.per_rank[k - 1].collected)
                if (std::log(e.covolume) - k * slope <= p.margin + slack)
                    p.active.emplace_back(Sublattice(l, e.group.gens()));
    }
    return p;
}

struct RoundnessPoint {
    Vec x;
    double margin = 0.0;
    MinimaResult minima;
    std::vector<IVec> lower;  // vectors within `slack` of lambda_1
};

inline RoundnessPoint evaluate_roundness(const Lattice& l, const NormSpec& norm, const Vec& x, double slack,
                                         const EnumerationOptions& eopts) {
    RoundnessPoint p;
    p.x = x;
    const Lattice scaled = apply_diag(DiagCoord(x), l);
    ShortVectorEnumerator en(scaled);
    p.minima = successive_minima(en, norm, eopts);
    p.margin = -std::log(p.minima.values.back() / p.minima.values.front());
    if (slack > 0) {
        const double bound = p.minima.values.front() * std::exp(slack);
        for (const auto& v : en.within(bound / norm.c_low(l.dim()), eopts)) {
            if (norm(v.vec) <= bound) p.lower.push_back(v.coeffs);
            if (p.lower.size() >= 256) break;
        }
    }
    return p;
}

}  // namespace detail

/// min over proper ranks k of log(min cov_k(exp(x) L)) - (k/n) log|det L|; zero or
/// more (within tolerance) iff exp(x) L is stable.
inline double stability_margin(const DiagCoord& x, const Lattice& l, const MinCovolumeOptions& opts = {}) {
    return detail::evaluate_stability(l, x.x(), 0.0, opts).margin;
}

/// -log(lambda_n / lambda_1) of exp(x) L under the norm; zero iff well-rounded.
inline double wr_margin(const DiagCoord& x, const Lattice& l, const NormSpec& norm, const EnumerationOptions& opts = {}) {
    return detail::evaluate_roundness(l, norm, x.x(), 0.0, opts).margin;
}

// ---------------------------------------------------------------------------
// Active sublattices

struct ActiveSublattice {
    Sublattice group;
    double min_log_covolume;  // lower bound over the box
    Vec argmin;               // reduced coordinates of the approximate minimiser
};

/// All saturated proper subgroups G whose covolume cov(exp(x) G) drops to c_F or
/// below somewhere in the box. Completeness: at such x, G is the saturation of its
/// successive-minima vectors; moving to the box centre changes lengths by at most
/// exp(h) with h = max |x - x_c|_inf, so those vectors have centre length at most
/// exp(h k) (2^k / V_k) c_F / (lambda_1 ... lambda_{k-1} of the centre lattice).
inline std::vector<ActiveSublattice> active_sublattices(const Lattice& l, const TraceZeroBox& box, double c_f,
                                                        double tol = kDefaultTol, const EnumerationOptions& eopts = {}) {
    const int n = l.dim();
    if (box.dims() != n - 1) throw InputError("box dimension must be n - 1");
    if ((box.hi - box.lo).minCoeff() < 0) throw InputError("box has an empty side");
    const Mat dxdy = reduced_map(n);
    const DiagCoord center = DiagCoord::from_reduced(box.center());
    double h = 0.0;
    for (const Vec& c : box.corners())
        h = std::max(h, (DiagCoord::from_reduced(c).x() - center.x()).lpNorm<Eigen::Infinity>());

    const Lattice scaled = apply_diag(center, l);
    ShortVectorEnumerator en(scaled);
    MinimaResult euclid = successive_minima(en, NormSpec::euclidean(), eopts);

    std::vector<ActiveSublattice> out;
    std::map<std::vector<std::int64_t>, bool> seen;
    for (int k = 1; k < n; ++k) {
        const double kminus = std::pow(2.0, k) / unit_ball_volume(k);
        double lower = 1.0;
        for (int i = 0; i + 1 < k; ++i) lower *= euclid.values[i];
        const double prod_bound = std::exp(h * k) * kminus * c_f * (1 + 1e-9);
        const double radius = prod_bound / lower;
        const auto vs = en.within(radius, eopts);

        std::vector<std::size_t> pick(k);
        std::vector<IntegerSpan> spans(k + 1, IntegerSpan(n));
        auto recurse = [&](auto&& self, int depth, std::size_t from, double prod) -> void {
            for (std::size_t i = from; i < vs.size(); ++i) {
                if (prod * std::pow(vs[i].norm, k - depth) > prod_bound) break;
                spans[depth + 1] = spans[depth];
                if (!spans[depth + 1].try_add(vs[i].coeffs)) continue;
                pick[depth] = i;
                if (depth + 1 < k) {
                    self(self, depth + 1, i + 1, prod * vs[i].norm);
                    continue;
                }
                IMat gens(n, k);
                for (int m = 0; m < k; ++m) gens.col(m) = vs[pick[m]].coeffs;
                IMat canon = saturate_columns(gens);
                auto key = detail::flatten(canon);
                if (!seen.emplace(std::move(key), true).second) continue;
                Sublattice g(l, canon);
                SubgroupModel model(g);
                auto f = [&](const Vec& y) { return model.log_covolume(dxdy * y); };
                auto grad = [&](const Vec& y) { return Vec(dxdy.transpose() * model.gradient(dxdy * y)); };
                BoxMinimum bm = minimize_on_box(f, grad, box, box.center());
                if (bm.lower_bound <= std::log(c_f) + tol) out.push_back({g, bm.lower_bound, bm.argmin});
            }
        };
        recurse(recurse, 0, 0, 1.0);
    }
    std::sort(out.begin(), out.end(), [](const ActiveSublattice& a, const ActiveSublattice& b) {
        if (a.group.rank() != b.group.rank()) return a.group.rank() < b.group.rank();
        return a.min_log_covolume < b.min_log_covolume;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Search

enum class SearchTarget { stable, well_rounded };

inline const char* to_string(SearchTarget t) { return t == SearchTarget::stable ? "stable" : "wr"; }

struct SearchOptions {
    double tol = kDefaultTol;
    std::size_t max_iterations = 10'000;
    double time_limit_seconds = 60.0;
    std::uint64_t seed = 0;
    double min_gain = 1e-12;
    double restart_scale = 1.0;
    unsigned threads = 1;
    bool certify = false;
    double box_radius = 0.5;
    std::size_t max_boxes = 4096;
    MinCovolumeOptions mincov;
};

struct StepRecord {
    std::size_t branch = 0;
    std::string kind;  // "start", "flag", "trust-region", "perturb", "bnb"
    double margin_before = 0.0;
    double margin_after = 0.0;
    double step = 0.0;
};

struct CertificateEntry {
    int rank = 0;          // subgroup rank (stable) or minimum index (wr)
    IMat gens;             // coefficients in the input basis
    double value = 0.0;    // covolume or norm at the witness
    double radius = 0.0;   // enumeration radius backing the value
    bool certified = false;
};

struct SearchResult {
    bool success = false;
    SearchTarget target = SearchTarget::stable;
    std::string norm = "euclidean";
    DiagCoord witness = DiagCoord::zero(1);
    double margin = -std::numeric_limits<double>::infinity();
    double tol = kDefaultTol;
    std::vector<CertificateEntry> certificate;
    std::size_t iterations = 0;
    std::size_t branches = 0;
    double wall_seconds = 0.0;
    std::vector<StepRecord> steps;
    std::vector<std::string> notes;
};

namespace detail {

class Budget {
public:
    Budget(std::size_t iterations, double seconds)
        : left_(iterations), deadline_(std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds))) {}

    bool take() {
        if (left_ == 0 || std::chrono::steady_clock::now() > deadline_) return false;
        --left_;
        ++used_;
        return true;
    }
    std::size_t used() const { return used_; }
    std::size_t left() const { return left_; }

private:
    std::size_t left_;
    std::size_t used_ = 0;
    std::chrono::steady_clock::time_point deadline_;
};

inline Vec random_trace_zero(std::mt19937_64& rng, int n, double radius) {
    std::normal_distribution<double> gauss;
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    v.array() -= v.mean();
    const double nv = v.norm();
    return nv > 0 ? Vec(v * (radius / nv)) : Vec(Vec::Zero(n));
}

/// Uniform expansion of the coordinates sigma({1..d}), projected to trace zero.
inline Vec flag_direction(const std::vector<Mat>& proper_members, double tol) {
    if (proper_members.empty()) return Vec();
    const Eigen::Index n = proper_members.front().rows();
    std::vector<Mat> chain = proper_members;
    chain.push_back(Mat::Identity(n, n));
    Permutation sigma = flag_support_permutation(chain, tol);
    const auto d = proper_members.back().cols();
    Vec dir = Vec::Zero(n);
    for (Eigen::Index i = 0; i < d; ++i) dir(sigma[i] - 1) = 1.0;
    dir.array() -= dir.mean();
    return dir;
}

/// One branch of local search. Each iteration tries a trust-region step on the
/// linearised active pieces, then a flag-guided direction with backtracking
/// (initial step 1, factor 1/2); when neither gains, the trust radius shrinks.
/// Returns when the target margin is reached, the branch stagnates, or the
/// budget is exhausted.
template <typename Evaluate, typename MarginOnly, typename FlagMembers, typename LpStep>
struct LocalSearch {
    Evaluate evaluate;      // (x, slack) -> point with .margin
    MarginOnly margin_at;   // x -> margin
    FlagMembers flag_of;    // point -> step direction (may throw IntegrityError on a tie)
    LpStep lp_step;         // (point, radius) -> optional trial x

    static double slack_for(double radius) { return std::min(0.5, 2 * radius); }

    template <typename Point>
    bool run(Point& p, std::size_t branch, const SearchOptions& opts, Budget& budget, std::mt19937_64& rng,
             std::vector<StepRecord>& steps, std::stop_token stop) {
        double radius = 1.0;
        const int n = static_cast<int>(p.x.size());
        while (p.margin < -opts.tol) {
            if (stop.stop_requested() || !budget.take()) return false;

            if (std::optional<Vec> trial = lp_step(p, radius)) {
                const double m = margin_at(*trial);
                if (m >= p.margin + opts.min_gain) {
                    radius = std::min(4.0, 2 * radius);
                    Point q = evaluate(*trial, slack_for(radius));
                    steps.push_back({branch, "trust-region", p.margin, q.margin, radius});
                    p = std::move(q);
                    continue;
                }
            }

            Vec dir;
            try {
                dir = flag_of(p);
            } catch (const IntegrityError&) {
                Vec kick = random_trace_zero(rng, n, 1e-6);
                Point q = evaluate(Vec(p.x + kick), slack_for(radius));
                steps.push_back({branch, "perturb", p.margin, q.margin, 1e-6});
                p = std::move(q);
                continue;
            }
            bool accepted = false;
            if (dir.size() > 0 && dir.squaredNorm() > 0) {
                for (double s = 1.0; s >= 1.0 / 1024; s *= 0.5) {
                    if (!budget.take()) return false;
                    const double m = margin_at(Vec(p.x + s * dir));
                    if (m >= p.margin + opts.min_gain) {
                        Point q = evaluate(Vec(p.x + s * dir), slack_for(radius));
                        steps.push_back({branch, "flag", p.margin, q.margin, s});
                        p = std::move(q);
                        accepted = true;
                        break;
                    }
                }
            }
            if (accepted) continue;

            // the active set computed for a larger radius still covers the smaller one
            radius *= 0.25;
            if (radius < 1e-11) return false;  // stagnated
        }
        return true;
    }
};

template <typename E, typename M, typename F, typename L>
LocalSearch<E, M, F, L> make_local_search(E e, M m, F f, L l) {
    return {std::move(e), std::move(m), std::move(f), std::move(l)};
}

/// Runs branches 0, 1, 2, ... (branch 0 starts at x = 0, branch i > 0 at a random
/// point on the trace-zero sphere of radius restart_scale * sqrt(i)). With
/// threads > 1, batches of branches run concurrently and the lowest-index success wins.
template <typename RunBranch>
SearchResult multistart(int n, const SearchOptions& opts, RunBranch&& run_branch) {
    SearchResult best;
    best.witness = DiagCoord::zero(n);
    Budget budget(opts.max_iterations, opts.time_limit_seconds);
    const unsigned threads = std::max(1u, opts.threads);
    std::size_t branch = 0;
    while (budget.left() > 0) {
        struct Outcome {
            bool success = false;
            Vec x;
            double margin = -std::numeric_limits<double>::infinity();
            std::vector<StepRecord> steps;
            std::size_t used = 0;
        };
        std::vector<Outcome> outcomes(threads);
        std::vector<std::stop_source> stops(threads);
        const std::size_t share = std::max<std::size_t>(1, budget.left() / threads);
        auto work = [&](unsigned t) {
            const std::size_t id = branch + t;
            std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ull + id);
            Vec x0 = id == 0 ? Vec(Vec::Zero(n)) : random_trace_zero(rng, n, opts.restart_scale * std::sqrt(double(id)));
            Budget local(threads == 1 ? budget.left() : share, opts.time_limit_seconds);
            Outcome& o = outcomes[t];
            o.success = run_branch(id, x0, local, rng, o.x, o.margin, o.steps, stops[t].get_token());
            o.used = local.used();
            if (o.success)
                for (unsigned u = t + 1; u < threads; ++u) stops[u].request_stop();
        };
        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        }
        for (unsigned t = 0; t < threads; ++t) {
            Outcome& o = outcomes[t];
            for (std::size_t i = 0; i < o.used; ++i)
                if (!budget.take()) break;
            best.steps.insert(best.steps.end(), o.steps.begin(), o.steps.end());
            ++best.branches;
            if (o.x.size() > 0 && (o.success || o.margin > best.margin)) {
                best.margin = o.margin;
                best.witness = DiagCoord(o.x);
            }
            if (o.success) {
                best.success = true;
                best.iterations = budget.used();
                return best;
            }
        }
        if (n == 1) break;
        branch += threads;
        if (budget.used() == 0) break;
    }
    best.iterations = budget.used();
    return best;
}

inline std::vector<Mat> hn_members(const StabilityPoint& p, double tol, const Lattice& l) {
    const int n = l.dim();
    std::vector<double> y{0.0};
    const double slope = chord_slope(l);
    for (const auto& r : p.per_rank) y.push_back(std::log(r.covolume) - slope * r.best.rank());
    y.push_back(0.0);
    std::vector<Mat> members;
    const Lattice scaled = apply_diag(DiagCoord(p.x), l);
    for (int v : lower_hull_vertices(y, tol)) {
        if (v == 0 || v == n) continue;
        const auto& r = p.per_rank[v - 1];
        if (!r.ties.empty()) throw IntegrityError("tie at a Harder-Narasimhan vertex");
        members.push_back(scaled.basis() * r.best.gens().cast<double>());
    }
    return members;
}

}  // namespace detail

/// Local search for x with stability_margin(x, L) >= -tol; see SearchOptions.
inline SearchResult find_stable(const Lattice& l, const SearchOptions& opts = {});

/// Local search for x with wr_margin(x, L, N) >= -tol.
inline SearchResult find_well_rounded(const Lattice& l, const NormSpec& norm, const SearchOptions& opts = {});

/// Certificate for a stable witness: the minimal subgroup of every proper rank at the witness.
inline std::vector<CertificateEntry> stable_certificate(const Lattice& l, const DiagCoord& x,
                                                        const MinCovolumeOptions& opts = {}) {
    std::vector<CertificateEntry> out;
    auto p = detail::evaluate_stability(l, x.x(), 0.0, opts);
    for (const auto& r : p.per_rank)
        out.push_back({r.best.rank(), r.best.gens(), r.covolume, r.certificate.radius, r.certificate.certified});
    return out;
}

inline std::vector<CertificateEntry> roundness_certificate(const Lattice& l, const NormSpec& norm, const DiagCoord& x,
                                                           const EnumerationOptions& opts = {}) {
    std::vector<CertificateEntry> out;
    auto m = successive_minima(apply_diag(x, l), norm, opts);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        out.push_back({static_cast<int>(i + 1), IMat(m.witnesses[i].coeffs), m.values[i], m.euclidean_radius, true});
    return out;
}

namespace detail {

/// Branch-and-bound over a box in reduced coordinates using convexity of each
/// x -> log cov(exp(x) G): a box is excluded when some active G has all corner
/// values below -tol (the maximum of a convex function sits at a corner).
inline std::optional<Vec> certified_stable_box_search(const Lattice& l, const SearchOptions& opts,
                                                      std::vector<std::string>& notes, Budget& budget) {
    const int n = l.dim();
    const Mat dxdy = reduced_map(n);
    const double slope = chord_slope(l);
    const TraceZeroBox root = TraceZeroBox::around(Vec::Zero(n - 1), opts.box_radius);
    const double threshold = std::exp(n * slope);  // covolume 1 for unimodular lattices
    auto family = active_sublattices(l, root, std::max(threshold, 1.0), opts.tol, opts.mincov.enumeration);
    std::vector<SubgroupModel> models;
    for (const auto& a : family) models.emplace_back(a.group);

    std::deque<std::pair<TraceZeroBox, std::vector<std::size_t>>> queue;
    std::vector<std::size_t> all(models.size());
    std::iota(all.begin(), all.end(), 0);
    queue.emplace_back(root, all);
    std::size_t excluded = 0, explored = 0, unresolved = 0;
    while (!queue.empty() && explored < opts.max_boxes) {
        if (!budget.take()) break;
        auto [box, idx] = std::move(queue.front());
        queue.pop_front();
        ++explored;
        const auto corners = box.corners();
        bool dead = false;
        std::vector<std::size_t> live;
        for (std::size_t i : idx) {
            const auto& m = models[i];
            const double offset = slope * m.rank();
            double worst_corner = -std::numeric_limits<double>::infinity();
            for (const auto& c : corners) worst_corner = std::max(worst_corner, m.log_covolume(dxdy * c) - offset);
            if (worst_corner < -opts.tol) {
                dead = true;
                break;
            }
            auto f = [&](const Vec& y) { return m.log_covolume(dxdy * y) - offset; };
            auto g = [&](const Vec& y) { return Vec(dxdy.transpose() * m.gradient(dxdy * y)); };
            if (minimize_on_box(f, g, box, box.center()).lower_bound < -opts.tol) live.push_back(i);
        }
        if (dead) {
            ++excluded;
            continue;
        }
        const Vec c = box.center();
        if (live.empty() || stability_margin(DiagCoord::from_reduced(c), l, opts.mincov) >= -opts.tol) {
            notes.push_back("branch-and-bound: witness box found after " + std::to_string(explored) + " boxes (" +
                            std::to_string(excluded) + " certified unstable, active family " +
                            std::to_string(models.size()) + ")");
            return DiagCoord::from_reduced(c).x();
        }
        Eigen::Index axis = 0;
        const double width = (box.hi - box.lo).maxCoeff(&axis);
        if (width < 1e-3) {
            ++unresolved;
            continue;
        }
        TraceZeroBox left = box, right = box;
        left.hi(axis) = right.lo(axis) = c(axis);
        queue.emplace_back(left, live);
        queue.emplace_back(right, live);
    }
    notes.push_back("branch-and-bound: " + std::to_string(explored) + " boxes explored, " +
                    std::to_string(excluded) + " certified unstable, " + std::to_string(unresolved) +
                    " unresolved below width 1e-3" + (queue.empty() ? "" : ", budget reached"));
    if (queue.empty() && unresolved == 0)
        notes.push_back("branch-and-bound: the box contains no stable point");
    return std::nullopt;
}

}  // namespace detail

inline SearchResult find_stable(const Lattice& l, const SearchOptions& opts) {
    if (!l.is_unimodular(1e-9)) throw InputError("stable-point search needs a unimodular lattice");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = l.dim();

    auto evaluate = [&](const Vec& x, double slack) { return detail::evaluate_stability(l, x, slack, opts.mincov); };
    auto margin_at = [&](const Vec& x) { return detail::evaluate_stability(l, x, 0.0, opts.mincov).margin; };
    auto flag_of = [&](const detail::StabilityPoint& p) {
        return detail::flag_direction(detail::hn_members(p, opts.tol, l), opts.tol);
    };
    auto lp_step = [&](const detail::StabilityPoint& p, double radius) -> std::optional<Vec> {
        if (p.active.empty()) return std::nullopt;
        const double slope = detail::chord_slope(l);
        LinearProgram lp(n + 1);  // d_1..d_n, t
        lp.objective(n) = 1.0;
        for (const auto& m : p.active) {
            Vec row = Vec::Zero(n + 1);
            row.head(n) = -m.gradient(p.x);
            row(n) = 1.0;
            lp.add_le(row, m.log_covolume(p.x) - slope * m.rank());
        }
        Vec sum = Vec::Zero(n + 1);
        sum.head(n).setOnes();
        lp.add_eq(sum, 0.0);
        for (int i = 0; i < n; ++i) lp.add_bounds(i, -radius, radius);
        auto r = solve_lp(lp);
        if (r.status != LpStatus::optimal) return std::nullopt;
        return Vec(p.x + r.x.head(n));
    };
    auto search = detail::make_local_search(evaluate, margin_at, flag_of, lp_step);

    SearchResult res;
    std::vector<std::string> notes;
    std::optional<Vec> boxed;
    if (opts.certify && n > 1) {
        detail::Budget bb(opts.max_iterations, opts.time_limit_seconds);
        try {
            boxed = detail::certified_stable_box_search(l, opts, notes, bb);
        } catch (const ResourceError& e) {
            notes.push_back(std::string("branch-and-bound abandoned: ") + e.what());
        }
    }
    if (boxed) {
        res.success = true;
        res.witness = DiagCoord(*boxed);
        res.branches = 0;
    } else {
        res = detail::multistart(n, opts,
                                 [&](std::size_t id, const Vec& x0, detail::Budget& budget, std::mt19937_64& rng,
                                     Vec& x_out, double& m_out, std::vector<StepRecord>& steps, std::stop_token st) {
                                     auto p = evaluate(x0, 0.5);
                                     steps.push_back({id, "start", p.margin, p.margin, 0.0});
                                     bool ok = search.run(p, id, opts, budget, rng, steps, st);
                                     x_out = p.x;
                                     m_out = p.margin;
                                     return ok;
                                 });
    }
    res.target = SearchTarget::stable;
    res.tol = opts.tol;
    res.notes.insert(res.notes.begin(), notes.begin(), notes.end());
    res.notes.push_back("budgets and restart schedule are engineering choices; the orbit theorem guarantees existence but gives no rate");
    res.certificate = stable_certificate(l, res.witness, opts.mincov);
    res.margin = std::numeric_limits<double>::infinity();
    if (n == 1) res.margin = 0.0;
    const double slope = detail::chord_slope(l);
    for (const auto& e : res.certificate) res.margin = std::min(res.margin, std::log(e.value) - slope * e.rank);
    res.success = res.margin >= -opts.tol;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline SearchResult find_well_rounded(const Lattice& l, const NormSpec& norm, const SearchOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = l.dim();
    const auto& eopts = opts.mincov.enumeration;

    auto evaluate = [&](const Vec& x, double slack) { return detail::evaluate_roundness(l, norm, x, slack, eopts); };
    auto margin_at = [&](const Vec& x) { return detail::evaluate_roundness(l, norm, x, 0.0, eopts).margin; };
    auto flag_of = [&](const detail::RoundnessPoint& p) {
        const Lattice scaled = apply_diag(DiagCoord(p.x), l);
        std::vector<Mat> members;
        for (int i = 0; i + 1 < n; ++i) {
            if (p.minima.values[i + 1] <= p.minima.values[i] * (1 + opts.tol)) continue;
            IMat gens(n, i + 1);
            for (int j = 0; j <= i; ++j) gens.col(j) = p.minima.witnesses[j].coeffs;
            members.push_back(scaled.basis() * gens.cast<double>());
        }
        return detail::flag_direction(members, opts.tol);
    };
    auto piece = [&](const IVec& coeffs, const Vec& x) {
        const Vec u = x.array().exp().matrix().cwiseProduct(l.vector(coeffs));
        return std::make_pair(std::log(norm(u)), norm.log_gradient(u));
    };
    auto lp_step = [&](const detail::RoundnessPoint& p, double radius) -> std::optional<Vec> {
        if (p.lower.empty()) return std::nullopt;
        LinearProgram lp(n + 2);  // d_1..d_n, t, u ; maximize t with t <= f_v - u, u >= f_w
        lp.objective(n) = 1.0;
        for (const auto& v : p.lower) {
            auto [f, g] = piece(v, p.x);
            Vec row = Vec::Zero(n + 2);
            row.head(n) = -g;
            row(n) = 1.0;
            row(n + 1) = 1.0;
            lp.add_le(row, f);
        }
        for (const auto& w : p.minima.witnesses) {
            auto [f, g] = piece(w.coeffs, p.x);
            Vec row = Vec::Zero(n + 2);
            row.head(n) = g;
            row(n + 1) = -1.0;
            lp.add_le(row, -f);
        }
        Vec sum = Vec::Zero(n + 2);
        sum.head(n).setOnes();
        lp.add_eq(sum, 0.0);
        for (int i = 0; i < n; ++i) lp.add_bounds(i, -radius, radius);
        auto r = solve_lp(lp);
        if (r.status != LpStatus::optimal) return std::nullopt;
        return Vec(p.x + r.x.head(n));
    };
    auto search = detail::make_local_search(evaluate, margin_at, flag_of, lp_step);

    SearchResult res = detail::multistart(
        n, opts,
        [&](std::size_t id, const Vec& x0, detail::Budget& budget, std::mt19937_64& rng, Vec& x_out, double& m_out,
            std::vector<StepRecord>& steps, std::stop_token st) {
            auto p = evaluate(x0, 0.5);
            steps.push_back({id, "start", p.margin, p.margin, 0.0});
            bool ok = search.run(p, id, opts, budget, rng, steps, st);
            x_out = p.x;
            m_out = p.margin;
            return ok;
        });
    res.target = SearchTarget::well_rounded;
    res.norm = norm.name();
    res.tol = opts.tol;
    res.notes.push_back("budgets and restart schedule are engineering choices; the orbit theorem guarantees existence but gives no rate");
    res.certificate = roundness_certificate(l, norm, res.witness, eopts);
    res.margin = -std::log(res.certificate.back().value / res.certificate.front().value);
    res.success = res.margin >= -opts.tol;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Re-evaluates the predicate at the witness.
inline bool verify_search_result(const Lattice& l, const SearchResult& r, const NormSpec& norm = NormSpec::euclidean(),
                                 const MinCovolumeOptions& opts = {}) {
    if (r.target == SearchTarget::stable) return stability_margin(r.witness, l, opts) >= -r.tol;
    return wr_margin(r.witness, l, norm, opts.enumeration) >= -r.tol;
}

}  // namespace orbitlat
