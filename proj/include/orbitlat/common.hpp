#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace orbitlat {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using QMat = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

/// Global comparison tolerance for floating-point threshold predicates.
inline constexpr double kDefaultTol = 1e-9;

/// Malformed or out-of-contract input.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Enumeration or search exceeded a configured cap.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::size_t cap)
        : std::runtime_error(what), cap_(cap) {}
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

/// An internal consistency check failed (numerical degeneracy or a bug).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scalar-generic helpers so the same elimination code runs on double and Rational.
template <typename T>
struct ScalarOps;

template <>
struct ScalarOps<double> {
    static constexpr bool exact = false;
    static double abs(double x) { return std::abs(x); }
    static bool is_zero(double x, double tol) { return std::abs(x) <= tol; }
    static double to_double(double x) { return x; }
};

template <>
struct ScalarOps<Rational> {
    static constexpr bool exact = true;
    static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
    static bool is_zero(const Rational& x, double) { return x == 0; }
    static double to_double(const Rational& x) { return x.convert_to<double>(); }
};

/// Volume of the Euclidean unit ball in R^k.
inline double unit_ball_volume(int k) {
    return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw IntegrityError("integer overflow in lattice arithmetic");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw IntegrityError("integer overflow in lattice arithmetic");
    return r;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline QMat to_rational(const IMat& m) {
    QMat q(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) q(i, j) = Rational(m(i, j));
    return q;
}

inline Mat to_double(const QMat& m) {
    Mat d(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).convert_to<double>();
    return d;
}

inline Mat to_double(const IMat& m) { return m.cast<double>(); }

/// Rational matrix product (Eigen's operator* does not instantiate with boost rationals).
inline QMat qmul(const QMat& a, const QMat& b) {
    if (a.cols() != b.rows()) throw InputError("matrix product shape mismatch");
    QMat c(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            Rational s = 0;
            for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

}  // namespace orbitlat
