#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace porthamil {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;
using cplx = std::complex<double>;
using CMat2 = Eigen::Matrix2cd;
using CVec2 = Eigen::Vector2cd;

// Thrown when an input lies outside the domain an operation is defined on.
struct domain_violation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical procedure cannot produce a trustworthy result.
struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double rank_tol = 1e-10;

inline Eigen::VectorXd singular_values(const Mat& m) {
    if (m.size() == 0) return Vec();
    return Eigen::JacobiSVD<Mat>(m).singularValues();
}

// Rank with a threshold relative to the largest singular value.
inline int numerical_rank(const Mat& m, double rel = rank_tol) {
    Vec s = singular_values(m);
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++r;
    return r;
}

// Orthonormal basis of the null space of m (columns).
inline Mat null_space(const Mat& m, double rel = rank_tol) {
    const int cols = static_cast<int>(m.cols());
    if (m.rows() == 0) return Mat::Identity(cols, cols);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    const int r = numerical_rank(m, rel);
    return svd.matrixV().rightCols(cols - r);
}

// Orthonormal basis of the column space of m.
inline Mat range_basis(const Mat& m, double rel = rank_tol) {
    if (m.cols() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
    const int r = numerical_rank(m, rel);
    return svd.matrixU().leftCols(r);
}

inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

inline double min_sym_eig(const Mat& m) {
    return Eigen::SelfAdjointEigenSolver<Mat>(sym(m), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline double max_sym_eig(const Mat& m) {
    return Eigen::SelfAdjointEigenSolver<Mat>(sym(m), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

// Largest generalized eigenvalue of sym(a) v = mu b v, b symmetric positive definite.
inline double max_gen_eig(const Mat& a, const Mat& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(sym(a), sym(b), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

// Block [[0,I],[I,0]] of size 2k.
inline Mat sigma_matrix(int k) {
    Mat s = Mat::Zero(2 * k, 2 * k);
    s.topRightCorner(k, k).setIdentity();
    s.bottomLeftCorner(k, k).setIdentity();
    return s;
}

// Dense polynomial in a local coordinate, coefficients ascending.
struct Poly {
    std::vector<double> c;

    Poly() = default;
    Poly(std::initializer_list<double> init) : c(init) {}
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {}

    double operator()(double s) const {
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
        return v;
    }

    Poly derivative(int order = 1) const {
        Poly p = *this;
        for (int k = 0; k < order; ++k) {
            if (p.c.size() <= 1) return Poly{0.0};
            std::vector<double> d(p.c.size() - 1);
            for (std::size_t i = 1; i < p.c.size(); ++i) d[i - 1] = p.c[i] * static_cast<double>(i);
            p.c = std::move(d);
        }
        return p;
    }

    int degree() const { return c.empty() ? 0 : static_cast<int>(c.size()) - 1; }
};

inline Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> r(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
    return Poly(std::move(r));
}

inline Poly operator*(double s, const Poly& a) {
    Poly r = a;
    for (auto& v : r.c) v *= s;
    return r;
}

inline Poly operator*(const Poly& a, const Poly& b) {
    if (a.c.empty() || b.c.empty()) return Poly{0.0};
    std::vector<double> r(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
    return Poly(std::move(r));
}

// Composite 16-point Gauss-Legendre rule on [lo, hi] with `panels` equal panels.
template <class F>
auto integrate(F&& f, double lo, double hi, int panels = 1) -> decltype(f(lo)) {
    using boost::math::quadrature::gauss;
    const auto& x = gauss<double, 16>::abscissa();
    const auto& w = gauss<double, 16>::weights();
    const double width = (hi - lo) / panels;
    decltype(f(lo)) acc = f(lo) * 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        const double half = 0.5 * width;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) {
                acc += (w[i] * half) * f(mid);
            } else {
                acc += (w[i] * half) * f(mid + half * x[i]);
                acc += (w[i] * half) * f(mid - half * x[i]);
            }
        }
    }
    return acc;
}

}  // namespace porthamil
