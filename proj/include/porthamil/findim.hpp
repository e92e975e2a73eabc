#pragma once

#include "common.hpp"

#include <functional>
#include <random>

namespace porthamil::findim {

struct BondVector {
    Vec f;
    Vec e;
};

inline double plus_pairing(const BondVector& b1, const BondVector& b2) {
    if (b1.f.size() != b1.e.size() || b2.f.size() != b2.e.size() || b1.f.size() != b2.f.size())
        throw std::invalid_argument("plus_pairing: bond dimension mismatch");
    return b1.e.dot(b2.f) + b2.e.dot(b1.f);
}

// Subspace of the bond space R^n x R^n, columns stacked as (f; e).
class LinearSubspace {
public:
    LinearSubspace(int ambient_dim, Mat basis) : ambient_(ambient_dim), basis_(std::move(basis)) {
        if (ambient_ % 2 != 0) throw std::invalid_argument("LinearSubspace: ambient dimension must be even");
        if (basis_.cols() == 0) basis_.resize(ambient_, 0);
        if (basis_.rows() != ambient_) throw std::invalid_argument("LinearSubspace: basis rows != ambient dimension");
        if (numerical_rank(basis_) != basis_.cols())
            throw std::invalid_argument("LinearSubspace: degenerate basis");
    }

    int ambient_dim() const { return ambient_; }
    int bond_dim() const { return ambient_ / 2; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Mat& basis() const { return basis_; }

    BondVector member(const Vec& coeffs) const {
        Vec v = basis_ * coeffs;
        return {v.head(bond_dim()), v.tail(bond_dim())};
    }

private:
    int ambient_;
    Mat basis_;
};

struct DiracVerdict {
    bool is_dirac;
    bool dim_ok;
    bool pairing_vanishes;
};

inline DiracVerdict dirac_check(const LinearSubspace& d) {
    const int n = d.bond_dim();
    DiracVerdict v{};
    v.dim_ok = d.dim() == n;
    if (d.dim() == 0) {
        v.pairing_vanishes = true;
    } else {
        // Orthonormalize so the threshold does not depend on the basis scaling.
        Mat q = range_basis(d.basis());
        Mat gram = q.transpose() * sigma_matrix(n) * q;
        v.pairing_vanishes = gram.cwiseAbs().maxCoeff() <= 1e-10;
    }
    v.is_dirac = v.dim_ok && v.pairing_vanishes;
    return v;
}

inline void require_skew(const Mat& j, const char* who) {
    if (j.rows() != j.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
    const double scale = std::max(1.0, j.norm());
    if ((j + j.transpose()).norm() > 1e-12 * scale)
        throw std::invalid_argument(std::string(who) + ": matrix not skew-symmetric");
}

// {(f, e) : -f = J e}
inline LinearSubspace graph_dirac(const Mat& j) {
    require_skew(j, "graph_dirac");
    const auto n = j.rows();
    Mat basis(2 * n, n);
    basis << -j, Mat::Identity(n, n);
    return LinearSubspace(static_cast<int>(2 * n), basis);
}

inline Mat orthogonal_complement(const Mat& k) {
    if (k.cols() == 0) return Mat::Identity(k.rows(), k.rows());
    return null_space(k.transpose());
}

// K x K^perp for a subspace K of the flow space given by spanning columns.
inline LinearSubspace separable_dirac(const Mat& k) {
    const auto n = k.rows();
    Mat kb = range_basis(k);
    Mat kp = orthogonal_complement(kb);
    Mat basis = Mat::Zero(2 * n, kb.cols() + kp.cols());
    basis.topLeftCorner(n, kb.cols()) = kb;
    basis.bottomRightCorner(n, kp.cols()) = kp;
    return LinearSubspace(static_cast<int>(2 * n), basis);
}

struct ResistiveRelation {
    Mat Rf;
    Mat Re;
};

struct ResistiveVerdict {
    bool symmetric;
    bool psd;
    bool full_rank;
    bool dissipative_samples;
    bool pass;
};

// Checks Rf Re^T = Re Rf^T >= 0, rank [Rf Re] = m and e^T f <= 0 on the relation.
inline ResistiveVerdict resistive_check(const ResistiveRelation& rel, unsigned seed = 0, int samples = 64) {
    const auto m = rel.Rf.rows();
    if (rel.Rf.cols() != m || rel.Re.rows() != m || rel.Re.cols() != m)
        throw std::invalid_argument("resistive_check: matrices must be square of equal size");
    ResistiveVerdict v{};
    Mat prod = rel.Rf * rel.Re.transpose();
    const double scale = std::max(1.0, prod.norm());
    v.symmetric = (prod - prod.transpose()).norm() <= 1e-10 * scale;
    v.psd = min_sym_eig(prod) >= -1e-10 * scale;
    Mat stack(m, 2 * m);
    stack << rel.Rf, rel.Re;
    v.full_rank = numerical_rank(stack) == m;

    Mat ker = null_space(stack);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    v.dissipative_samples = true;
    for (int s = 0; s < samples && ker.cols() > 0; ++s) {
        Vec c(ker.cols());
        for (auto& x : c) x = g(rng);
        Vec fe = ker * c;
        if (fe.tail(m).dot(fe.head(m)) > 1e-10 * fe.squaredNorm()) v.dissipative_samples = false;
    }
    v.pass = v.symmetric && v.psd && v.full_rank && v.dissipative_samples;
    return v;
}

struct IsoSystem {
    Mat J;
    Mat R;
    Mat G;
    std::function<double(const Vec&)> H;
    std::function<Vec(const Vec&)> gradH;
    std::function<Mat(const Vec&)> hessH;  // optional; finite differences when empty

    void validate() const {
        const auto n = J.rows();
        if (J.cols() != n || R.rows() != n || R.cols() != n || G.rows() != n)
            throw std::invalid_argument("IsoSystem: inconsistent matrix sizes");
        if ((J + J.transpose()).norm() > 1e-12 * std::max(1.0, J.norm()))
            throw std::invalid_argument("IsoSystem: J not skew-symmetric");
        if ((R - R.transpose()).norm() > 1e-12 * std::max(1.0, R.norm()))
            throw std::invalid_argument("IsoSystem: R not symmetric");
        if (n > 0 && min_sym_eig(R) < -1e-12 * std::max(1.0, R.norm()))
            throw std::invalid_argument("IsoSystem: R not positive semidefinite");
        if (!H || !gradH) throw std::invalid_argument("IsoSystem: H and gradH required");
    }
};

// Largest relative deviation between gradH and central differences of H.
inline double gradient_consistency(const IsoSystem& sys, const Vec& x) {
    const Vec g = sys.gradH(x);
    Vec fd(x.size());
    for (int i = 0; i < x.size(); ++i) {
        const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        fd(i) = (sys.H(xp) - sys.H(xm)) / (2 * step);
    }
    return (fd - g).norm() / std::max(1.0, g.norm());
}

inline Mat hessian(const IsoSystem& sys, const Vec& x) {
    if (sys.hessH) return sys.hessH(x);
    const auto n = x.size();
    Mat h(n, n);
    for (int i = 0; i < n; ++i) {
        const double step = 1e-7 * std::max(1.0, std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        h.col(i) = (sys.gradH(xp) - sys.gradH(xm)) / (2 * step);
    }
    return h;
}

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> y;                // output at step midpoints (first entry at t0)
    std::vector<double> H;
    std::vector<double> supplied;      // cumulative supplied energy
    std::vector<double> ledger_excess; // H_{k+1} - H_k - supplied_k - tol, per step
    bool passive = true;
};

// Implicit midpoint integration of xdot = (J - R) gradH(x) + G u(t).
inline Trajectory iso_simulate(const IsoSystem& sys, const Vec& x0, const std::function<Vec(double)>& u,
                               double dt, double t_end) {
    sys.validate();
    if (!(dt > 0)) throw std::invalid_argument("iso_simulate: dt must be positive");
    if (x0.size() != sys.J.rows()) throw std::invalid_argument("iso_simulate: state dimension mismatch");
    if (gradient_consistency(sys, x0) > 1e-5)
        throw std::invalid_argument("iso_simulate: gradH inconsistent with H at x0");

    const Mat jr = sys.J - sys.R;
    const auto n = x0.size();
    const Mat id = Mat::Identity(n, n);
    Trajectory tr;
    Vec x = x0;
    double t = 0.0, supplied = 0.0;
    tr.t.push_back(t);
    tr.x.push_back(x);
    tr.y.push_back(sys.G.transpose() * sys.gradH(x));
    tr.H.push_back(sys.H(x));
    tr.supplied.push_back(0.0);

    const auto steps = static_cast<long>(std::llround(t_end / dt));
    for (long k = 0; k < steps; ++k) {
        const Vec uk = u(t + 0.5 * dt);
        Vec xn = x;
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            const Vec mid = 0.5 * (x + xn);
            const Vec res = xn - x - dt * (jr * sys.gradH(mid) + sys.G * uk);
            const Mat jac = id - 0.5 * dt * jr * hessian(sys, mid);
            const Vec delta = jac.partialPivLu().solve(res);
            xn -= delta;
            if (delta.norm() <= 1e-12 * std::max(1.0, xn.norm())) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw numerical_failure("iso_simulate: midpoint Newton did not converge at step " + std::to_string(k));
        const Vec y = sys.G.transpose() * sys.gradH(0.5 * (x + xn));
        const double inflow = dt * uk.dot(y);
        const double hn = sys.H(xn);
        const double tol = 1e-8 * (1.0 + std::abs(hn));
        const double excess = hn - tr.H.back() - inflow - tol;
        if (excess > 0) tr.passive = false;
        supplied += inflow;
        x = xn;
        t += dt;
        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.y.push_back(y);
        tr.H.push_back(hn);
        tr.supplied.push_back(supplied);
        tr.ledger_excess.push_back(excess);
    }
    return tr;
}

// H = k q^2 / 2 + p^2 / (2 m), state (q, p).
inline IsoSystem mass_spring(double m, double k) {
    IsoSystem s;
    s.J = (Mat(2, 2) << 0, 1, -1, 0).finished();
    s.R = Mat::Zero(2, 2);
    s.G = Mat::Zero(2, 1);
    s.H = [=](const Vec& x) { return 0.5 * k * x(0) * x(0) + x(1) * x(1) / (2 * m); };
    s.gradH = [=](const Vec& x) { return Vec((Vec(2) << k * x(0), x(1) / m).finished()); };
    s.hessH = [=](const Vec&) { return Mat((Mat(2, 2) << k, 0, 0, 1 / m).finished()); };
    return s;
}

struct LevitatedBallParams {
    double mass = 0.1;
    double gravity = 9.81;
    double coil_resistance = 1.0;
    double l0 = 0.5;    // inductance at q = 0
    double decay = 1.0; // L(q) = l0 / (1 + q^2 / decay^2)
};

// State (q, p, flux); H = m g q + p^2/(2m) + flux^2/(2 L(q)); input voltage, output current.
inline IsoSystem levitated_ball(const LevitatedBallParams& prm) {
    IsoSystem s;
    s.J = (Mat(3, 3) << 0, 1, 0, -1, 0, 0, 0, 0, 0).finished();
    s.R = Mat::Zero(3, 3);
    s.R(2, 2) = prm.coil_resistance;
    s.G = (Mat(3, 1) << 0, 0, 1).finished();
    const double m = prm.mass, g = prm.gravity, l0 = prm.l0, d2 = prm.decay * prm.decay;
    // 1/L(q) = (1 + q^2/d2) / l0
    s.H = [=](const Vec& x) {
        return m * g * x(0) + x(1) * x(1) / (2 * m) + x(2) * x(2) * (1 + x(0) * x(0) / d2) / (2 * l0);
    };
    s.gradH = [=](const Vec& x) {
        Vec gr(3);
        gr << m * g + x(2) * x(2) * x(0) / (d2 * l0), x(1) / m, x(2) * (1 + x(0) * x(0) / d2) / l0;
        return gr;
    };
    s.hessH = [=](const Vec& x) {
        Mat h = Mat::Zero(3, 3);
        h(0, 0) = x(2) * x(2) / (d2 * l0);
        h(0, 2) = h(2, 0) = 2 * x(2) * x(0) / (d2 * l0);
        h(1, 1) = 1 / m;
        h(2, 2) = (1 + x(0) * x(0) / d2) / l0;
        return h;
    };
    return s;
}

}  // namespace porthamil::findim
