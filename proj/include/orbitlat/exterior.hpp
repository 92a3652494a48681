#pragma once

// k-vectors in Plücker coordinates over the standard basis e_J = e_{j1} ^ ... ^ e_{jk}.

#include "orbitlat/linalg.hpp"

#include <compare>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace orbitlat {

/// Strictly increasing subset of {1, ..., n}. Ordered lexicographically.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(int n, std::vector<int> members) : n_(n), members_(std::move(members)) {
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (members_[i] < 1 || members_[i] > n_) throw InputError("index out of range in IndexSet");
            if (i > 0 && members_[i] <= members_[i - 1]) throw InputError("IndexSet members must be strictly increasing");
        }
    }

    /// {1, ..., k}
    static IndexSet prefix(int n, int k) {
        std::vector<int> m(k);
        for (int i = 0; i < k; ++i) m[i] = i + 1;
        return IndexSet(n, std::move(m));
    }

    int n() const { return n_; }
    int size() const { return static_cast<int>(members_.size()); }
    const std::vector<int>& members() const { return members_; }
    bool contains(int j) const { return std::binary_search(members_.begin(), members_.end(), j); }

    std::string str() const {
        std::ostringstream os;
        os << '{';
        for (std::size_t i = 0; i < members_.size(); ++i) os << (i ? "," : "") << members_[i];
        os << '}';
        return os.str();
    }

    friend bool operator==(const IndexSet&, const IndexSet&) = default;
    friend auto operator<=>(const IndexSet& a, const IndexSet& b) {
        if (auto c = a.n_ <=> b.n_; c != 0) return c;
        return a.members_ <=> b.members_;
    }

private:
    int n_ = 0;
    std::vector<int> members_;
};

/// All size-k subsets of {1..n} in lexicographic order.
inline std::vector<IndexSet> all_index_sets(int n, int k) {
    std::vector<IndexSet> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i + 1;
    while (true) {
        out.emplace_back(n, cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i + 1) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

/// Element of the k-th exterior power of R^n, stored sparsely (absent = 0).
template <typename T>
class KVector {
public:
    KVector(int n, int k) : n_(n), k_(k) {
        if (k < 0 || k > n) throw InputError("k-vector grade out of range");
    }

    /// e_J
    static KVector unit(const IndexSet& j) {
        KVector v(j.n(), j.size());
        v.coords_[j] = T(1);
        return v;
    }

    static KVector from_vector(const DVec<T>& x) {
        const int n = static_cast<int>(x.size());
        KVector v(n, 1);
        for (int i = 0; i < n; ++i)
            if (x(i) != T(0)) v.coords_[IndexSet(n, {i + 1})] = x(i);
        return v;
    }

    int n() const { return n_; }
    int grade() const { return k_; }
    const std::map<IndexSet, T>& coords() const { return coords_; }

    T coord(const IndexSet& j) const {
        auto it = coords_.find(j);
        return it == coords_.end() ? T(0) : it->second;
    }

    void set(const IndexSet& j, const T& value) {
        if (j.n() != n_ || j.size() != k_) throw InputError("index set does not match k-vector shape");
        if (value == T(0))
            coords_.erase(j);
        else
            coords_[j] = value;
    }

    void add(const IndexSet& j, const T& value) { set(j, coord(j) + value); }

    bool is_zero() const { return coords_.empty(); }

    KVector operator+(const KVector& o) const {
        check_shape(o);
        KVector r = *this;
        for (const auto& [j, c] : o.coords_) r.add(j, c);
        return r;
    }
    KVector operator-() const {
        KVector r = *this;
        for (auto& [j, c] : r.coords_) c = -c;
        return r;
    }
    KVector operator-(const KVector& o) const { return *this + (-o); }
    friend KVector operator*(const T& s, const KVector& v) {
        KVector r(v.n_, v.k_);
        for (const auto& [j, c] : v.coords_) r.set(j, s * c);
        return r;
    }

    friend bool operator==(const KVector&, const KVector&) = default;

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [j, c] : coords_) {
            os << (first ? "" : " + ") << c << "*e" << j.str();
            first = false;
        }
        if (first) os << '0';
        return os.str();
    }

private:
    void check_shape(const KVector& o) const {
        if (o.n_ != n_ || o.k_ != k_) throw InputError("k-vector shape mismatch");
    }

    int n_;
    int k_;
    std::map<IndexSet, T> coords_;
};

/// Sign of e_J ^ e_K as a multiple of e_{J u K}: (-1)^{#{(j,k): j in J, k in K, j > k}}.
inline int shuffle_sign(const IndexSet& j, const IndexSet& k) {
    int inversions = 0;
    for (int a : j.members())
        for (int b : k.members())
            if (a > b) ++inversions;
    return inversions % 2 ? -1 : 1;
}

template <typename T>
KVector<T> wedge(const KVector<T>& v, const KVector<T>& w) {
    if (v.n() != w.n()) throw InputError("wedge of k-vectors in different ambient dimensions");
    if (v.grade() + w.grade() > v.n()) throw InputError("wedge grade exceeds ambient dimension");
    KVector<T> out(v.n(), v.grade() + w.grade());
    for (const auto& [j, a] : v.coords()) {
        for (const auto& [k, b] : w.coords()) {
            std::vector<int> merged;
            std::set_union(j.members().begin(), j.members().end(), k.members().begin(), k.members().end(),
                           std::back_inserter(merged));
            if (static_cast<int>(merged.size()) != j.size() + k.size()) continue;
            out.add(IndexSet(v.n(), std::move(merged)), T(shuffle_sign(j, k)) * a * b);
        }
    }
    return out;
}

/// max_J |phi_J(v)|
template <typename T>
T kvec_norm(const KVector<T>& v) {
    T best(0);
    for (const auto& [j, c] : v.coords()) best = std::max(best, ScalarOps<T>::abs(c));
    return best;
}

/// Euclidean norm of the coordinate vector; equals the covolume for the wedge of a lattice basis.
inline double kvec_euclidean_norm(const KVector<double>& v) {
    double s = 0.0;
    for (const auto& [j, c] : v.coords()) s += c * c;
    return std::sqrt(s);
}

/// Index sets with nonzero coordinate. For double, "nonzero" means above tol * norm.
template <typename T>
std::set<IndexSet> support(const KVector<T>& v, double tol = kDefaultTol) {
    std::set<IndexSet> out;
    const double cut = ScalarOps<T>::exact ? 0.0 : tol * ScalarOps<T>::to_double(kvec_norm(v));
    for (const auto& [j, c] : v.coords())
        if (ScalarOps<T>::abs(c) > T(cut)) out.insert(j);
    return out;
}

/// Plücker coordinates of the columns of `basis` (n x k): phi_J = det of rows J.
template <typename T>
KVector<T> wedge_columns(const DMat<T>& basis) {
    const int n = static_cast<int>(basis.rows()), k = static_cast<int>(basis.cols());
    KVector<T> out(n, k);
    if (k == 0) {
        out.set(IndexSet(n, {}), T(1));
        return out;
    }
    DMat<T> minor(k, k);
    for (const auto& j : all_index_sets(n, k)) {
        for (int r = 0; r < k; ++r) minor.row(r) = basis.row(j.members()[r] - 1);
        out.set(j, determinant<T>(minor));
    }
    return out;
}

/// Support of span(basis) via Plücker coordinates. Throws on dependent input.
template <typename T>
std::set<IndexSet> support_of_subspace(const DMat<T>& basis, double tol = kDefaultTol) {
    if (matrix_rank<T>(basis, tol) != basis.cols()) throw InputError("subspace basis vectors are linearly dependent");
    return support(wedge_columns(basis), tol);
}

/// Support via the alternative characterisation: J such that the coordinate
/// projection onto J is injective on the subspace.
template <typename T>
std::set<IndexSet> projection_injective_support(const DMat<T>& basis, double tol = kDefaultTol) {
    const int n = static_cast<int>(basis.rows()), k = static_cast<int>(basis.cols());
    if (matrix_rank<T>(basis, tol) != k) throw InputError("subspace basis vectors are linearly dependent");
    std::set<IndexSet> out;
    DMat<T> proj(k, k);
    for (const auto& j : all_index_sets(n, k)) {
        for (int r = 0; r < k; ++r) proj.row(r) = basis.row(j.members()[r] - 1);
        if (matrix_rank<T>(proj, tol) == k) out.insert(j);
    }
    return out;
}

/// Action of diag(exp x_1, ..., exp x_n): phi_J scales by exp(sum_{j in J} x_j).
inline KVector<double> diag_act_kvector(const Vec& x, const KVector<double>& v) {
    if (x.size() != v.n()) throw InputError("diagonal action dimension mismatch");
    KVector<double> out(v.n(), v.grade());
    for (const auto& [j, c] : v.coords()) {
        double s = 0.0;
        for (int m : j.members()) s += x(m - 1);
        out.set(j, c * std::exp(s));
    }
    return out;
}

/// Subspace with a nonzero top k-vector, stored with the first nonzero coordinate
/// (lexicographic J) positive. The basis is kept as a decomposability witness.
template <typename T>
class MeasuredSubspace {
public:
    explicit MeasuredSubspace(DMat<T> basis) : basis_(std::move(basis)), plucker_(wedge_columns(basis_)) {
        if (plucker_.is_zero() || matrix_rank<T>(basis_) != basis_.cols())
            throw InputError("measured subspace needs linearly independent basis vectors");
        if (plucker_.coords().begin()->second < T(0)) {
            plucker_ = -plucker_;
            if (basis_.cols() > 0) basis_.col(0) = -basis_.col(0);
        }
    }

    int n() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const DMat<T>& basis() const { return basis_; }
    const KVector<T>& plucker() const { return plucker_; }
    T norm() const { return kvec_norm(plucker_); }

private:
    DMat<T> basis_;
    KVector<T> plucker_;
};

}  // namespace orbitlat
