#pragma once

#include "common.hpp"

#include <functional>

namespace porthamil {

// Side-wise coefficient matrices Q-(z), Q+(z) on [a, b]; the active one is Q- left of the interface.
struct CoefficientProfile {
    double a = -1.0;
    double b = 1.0;
    std::function<Mat2(double)> qminus;
    std::function<Mat2(double)> qplus;
    std::function<Mat2(double)> dqminus;
    std::function<Mat2(double)> dqplus;
    double m = 1.0;
    double M = 1.0;
    bool diagonal = true;
    bool constant = true;

    Mat2 q(bool plus, double z) const { return plus ? qplus(z) : qminus(z); }
    Mat2 dq(bool plus, double z) const { return plus ? dqplus(z) : dqminus(z); }
    Mat2 active(double z, double l) const { return z < l ? qminus(z) : qplus(z); }
};

// Samples symmetry and definiteness at 64 points per side and records the coercivity bounds.
inline void finalize_profile(CoefficientProfile& p) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool diag = true;
    for (int side = 0; side < 2; ++side)
        for (int i = 0; i < 64; ++i) {
            const double z = p.a + (p.b - p.a) * i / 63.0;
            const Mat2 q = p.q(side == 1, z);
            if (std::abs(q(0, 1) - q(1, 0)) > 1e-12 * std::max(1.0, q.norm()))
                throw std::invalid_argument("coefficient profile not symmetric at z = " + std::to_string(z));
            if (q(0, 1) != 0.0) diag = false;
            Eigen::SelfAdjointEigenSolver<Mat2> es(q);
            lo = std::min(lo, es.eigenvalues().minCoeff());
            hi = std::max(hi, es.eigenvalues().maxCoeff());
        }
    if (!(lo > 0)) throw std::invalid_argument("coefficient profile not positive definite");
    p.m = lo;
    p.M = hi;
    p.diagonal = diag;
}

inline CoefficientProfile constant_profile(double a, double b, const Mat2& qm, const Mat2& qp) {
    CoefficientProfile p;
    p.a = a;
    p.b = b;
    p.qminus = [qm](double) { return qm; };
    p.qplus = [qp](double) { return qp; };
    p.dqminus = [](double) { return Mat2::Zero().eval(); };
    p.dqplus = p.dqminus;
    p.constant = true;
    finalize_profile(p);
    return p;
}

// Diagonal entries given as polynomials in z: {Q11, Q22} per side.
inline CoefficientProfile polynomial_diagonal_profile(double a, double b, const std::array<Poly, 2>& qm,
                                                      const std::array<Poly, 2>& qp) {
    CoefficientProfile p;
    p.a = a;
    p.b = b;
    auto make = [](std::array<Poly, 2> d, int order) {
        return [d, order](double z) {
            Mat2 q = Mat2::Zero();
            q(0, 0) = d[0].derivative(order)(z);
            q(1, 1) = d[1].derivative(order)(z);
            return q;
        };
    };
    p.qminus = make(qm, 0);
    p.qplus = make(qp, 0);
    p.dqminus = make(qm, 1);
    p.dqplus = make(qp, 1);
    p.constant = qm[0].degree() == 0 && qm[1].degree() == 0 && qp[0].degree() == 0 && qp[1].degree() == 0;
    finalize_profile(p);
    return p;
}

// Interface trajectory l(t) with its derivative.
struct MovingPath {
    enum class Kind { fixed, linear, sinusoidal };
    Kind kind = Kind::fixed;
    double l0 = 0.0;
    double speed = 0.0;      // linear
    double amplitude = 0.0;  // sinusoidal
    double frequency = 0.0;  // angular frequency

    double operator()(double t) const {
        switch (kind) {
            case Kind::fixed: return l0;
            case Kind::linear: return l0 + speed * t;
            case Kind::sinusoidal: return l0 + amplitude * std::sin(frequency * t);
        }
        return l0;
    }

    double rate(double t) const {
        switch (kind) {
            case Kind::fixed: return 0.0;
            case Kind::linear: return speed;
            case Kind::sinusoidal: return amplitude * frequency * std::cos(frequency * t);
        }
        return 0.0;
    }

    std::pair<double, double> range(double tau) const {
        double lo = (*this)(0.0), hi = lo;
        for (int i = 0; i <= 1024; ++i) {
            const double v = (*this)(tau * i / 1024.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }
};

}  // namespace porthamil
