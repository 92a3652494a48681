#pragma once

// Small dense two-phase simplex (Bland's rule) for the polyhedral and trust-region
// subproblems. Sizes here are tens of rows, so a tableau is adequate.

#include "orbitlat/common.hpp"

#include <vector>

namespace orbitlat {

/// maximize objective . x  subject to  a . x <= b (rows of `le`) and a . x == b (rows of `eq`); x free.
struct LinearProgram {
    explicit LinearProgram(Eigen::Index vars) : objective(Vec::Zero(vars)) {}

    Vec objective;
    std::vector<std::pair<Vec, double>> le;
    std::vector<std::pair<Vec, double>> eq;

    Eigen::Index vars() const { return objective.size(); }
    void add_le(Vec a, double b) { le.emplace_back(std::move(a), b); }
    void add_eq(Vec a, double b) { eq.emplace_back(std::move(a), b); }
    void add_bounds(Eigen::Index i, double lo, double hi) {
        add_le(Vec::Unit(vars(), i), hi);
        add_le(-Vec::Unit(vars(), i), -lo);
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vec x;
    double value = 0.0;
};

namespace detail {

class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Mat::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

    double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
    double rhs(Eigen::Index r) const { return t_(r, t_.cols() - 1); }
    double& rhs(Eigen::Index r) { return t_(r, t_.cols() - 1); }
    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::Index cols() const { return t_.cols() - 1; }
    std::vector<Eigen::Index>& basis() { return basis_; }

    /// Objective row holds reduced costs of "maximize c . x" as  z_j - c_j.
    void set_objective(const Vec& c) {
        t_.row(rows()).setZero();
        for (Eigen::Index j = 0; j < c.size(); ++j) t_(rows(), j) = -c(j);
        for (Eigen::Index r = 0; r < rows(); ++r) {
            const Eigen::Index b = basis_[r];
            if (b >= 0 && b < c.size() && c(b) != 0.0) t_.row(rows()) += c(b) * t_.row(r);
        }
    }

    double objective_value() const { return t_(rows(), cols()); }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i <= rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[r] = c;
    }

    /// Runs Bland's-rule simplex over columns [0, allowed). Returns false when unbounded.
    bool optimize(Eigen::Index allowed, double eps) {
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed; ++j)
                if (t_(rows(), j) < -eps) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index r = 0; r < rows(); ++r) {
                if (t_(r, enter) <= eps) continue;
                const double ratio = rhs(r) / t_(r, enter);
                if (leave < 0 || ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis_[r] < basis_[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw IntegrityError("simplex iteration limit reached");
    }

private:
    Mat t_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp, double eps = 1e-10) {
    const Eigen::Index nv = lp.vars();
    const auto n_le = static_cast<Eigen::Index>(lp.le.size());
    const auto n_eq = static_cast<Eigen::Index>(lp.eq.size());
    const Eigen::Index rows = n_le + n_eq;
    // columns: x+ (nv), x- (nv), slacks (n_le), artificials (rows)
    const Eigen::Index split = 2 * nv, art0 = split + n_le, cols = art0 + rows;
    detail::Tableau t(rows, cols);

    auto fill = [&](Eigen::Index r, const Vec& a, double b, bool slack) {
        if (a.size() != nv) throw InputError("LP row has the wrong number of coefficients");
        const double sign = b < 0 ? -1.0 : 1.0;
        for (Eigen::Index j = 0; j < nv; ++j) {
            t.at(r, j) = sign * a(j);
            t.at(r, nv + j) = -sign * a(j);
        }
        if (slack) t.at(r, split + r) = sign;
        t.rhs(r) = sign * b;
        if (slack && sign > 0) {
            t.basis()[r] = split + r;
        } else {
            t.at(r, art0 + r) = 1.0;
            t.basis()[r] = art0 + r;
        }
    };
    for (Eigen::Index r = 0; r < n_le; ++r) fill(r, lp.le[r].first, lp.le[r].second, true);
    for (Eigen::Index r = 0; r < n_eq; ++r) fill(n_le + r, lp.eq[r].first, lp.eq[r].second, false);

    // phase 1: maximize -sum(artificials)
    Vec phase1 = Vec::Zero(cols);
    for (Eigen::Index r = 0; r < rows; ++r) phase1(art0 + r) = -1.0;
    t.set_objective(phase1);
    t.optimize(cols, eps);
    if (t.objective_value() < -1e-8) return {LpStatus::infeasible, Vec(), 0.0};

    for (Eigen::Index r = 0; r < rows; ++r) {
        if (t.basis()[r] < art0) continue;
        for (Eigen::Index j = 0; j < art0; ++j)
            if (std::abs(t.at(r, j)) > 1e-9) {
                t.pivot(r, j);
                break;
            }
    }

    Vec phase2 = Vec::Zero(cols);
    phase2.head(nv) = lp.objective;
    phase2.segment(nv, nv) = -lp.objective;
    t.set_objective(phase2);
    if (!t.optimize(art0, eps)) return {LpStatus::unbounded, Vec(), 0.0};

    Vec y = Vec::Zero(cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        if (t.basis()[r] >= 0) y(t.basis()[r]) = t.rhs(r);
    LpResult res{LpStatus::optimal, y.head(nv) - y.segment(nv, nv), 0.0};
    res.value = lp.objective.dot(res.x);
    return res;
}

}  // namespace orbitlat
