#pragma once

#include "boundary.hpp"
#include "profile.hpp"

#include <functional>
#include <random>

namespace porthamil::interface {

struct InterfaceSpec {
    double l = 0.0;
    double r = 0.0;

    void validate(double a, double b) const {
        if (!(a < l && l < b)) throw std::invalid_argument("interface position outside (a, b)");
        if (r < 0) throw std::invalid_argument("interface passivity constant must be nonnegative");
    }
};

struct InterfacePorts {
    double f_I = 0.0;
    double e_I = 0.0;
};

// Scalar function on [a, b] given by one polynomial per side in the local coordinate z - l.
struct ScalarField {
    double a = -1.0, b = 1.0, l = 0.0;
    Poly left{0.0}, right{0.0};

    double at(double z) const { return z < l ? left(z - l) : right(z - l); }
    double minus_limit() const { return left(0.0); }
    double plus_limit() const { return right(0.0); }
    double jump() const { return plus_limit() - minus_limit(); }

    double sup_norm() const {
        double s = 0.0;
        for (int i = 0; i <= 64; ++i) {
            s = std::max(s, std::abs(left(a - l + (l - a) * i / 64.0)));
            s = std::max(s, std::abs(right((b - l) * i / 64.0)));
        }
        return s;
    }
};

// Two-component field with a possible jump at l; sides use the local coordinate z - l.
struct PiecewiseField {
    double a = -1.0, b = 1.0, l = 0.0;
    std::array<Poly, 2> left{Poly{0.0}, Poly{0.0}};
    std::array<Poly, 2> right{Poly{0.0}, Poly{0.0}};

    ScalarField component(int i) const { return {a, b, l, left[i], right[i]}; }

    Vec2 on_side(bool plus, double z) const {
        const auto& p = plus ? right : left;
        return {p[0](z - l), p[1](z - l)};
    }
    Vec2 at(double z) const { return on_side(z >= l, z); }
    Vec2 minus_limit() const { return on_side(false, l); }
    Vec2 plus_limit() const { return on_side(true, l); }

    double sup_norm() const { return std::max(component(0).sup_norm(), component(1).sup_norm()); }
};

// Integral over both sides of a function evaluated per side: f(plus, z).
template <class F>
double side_integral(double a, double l, double b, F&& f, int panels = 1) {
    return integrate([&](double z) { return f(false, z); }, a, l, panels) +
           integrate([&](double z) { return f(true, z); }, l, b, panels);
}

inline void require_continuous(const ScalarField& x, const char* what) {
    const double scale = std::max(1.0, x.sup_norm());
    if (std::abs(x.jump()) > 1e-12 * scale)
        throw domain_violation(std::string(what) + ": field not continuous at the interface");
}

// -d/dz on a field that is continuous across l.
inline ScalarField apply_dl(const ScalarField& x) {
    require_continuous(x, "apply_dl");
    return {x.a, x.b, x.l, -1.0 * x.left.derivative(), -1.0 * x.right.derivative()};
}

// +d/dz per side; jumps at l are allowed.
inline ScalarField apply_dl_star(const ScalarField& y) {
    return {y.a, y.b, y.l, y.left.derivative(), y.right.derivative()};
}

inline double l2_inner(const ScalarField& u, const ScalarField& v) {
    return side_integral(u.a, u.l, u.b, [&](bool plus, double z) {
        return plus ? u.right(z - u.l) * v.right(z - v.l) : u.left(z - u.l) * v.left(z - v.l);
    });
}

inline double duality_residual(const ScalarField& x, const ScalarField& y) {
    const ScalarField dx = apply_dl(x);
    const ScalarField dy = apply_dl_star(y);
    const double bracket = x.at(x.b) * y.right(x.b - x.l) - x.left(x.a - x.l) * y.left(x.a - x.l);
    return std::abs(l2_inner(dx, y) + bracket - x.minus_limit() * y.jump() - l2_inner(x, dy));
}

inline void require_flux_continuity(const PiecewiseField& e, const char* what) {
    const ScalarField e2 = e.component(1);
    const double scale = std::max(1.0, e.sup_norm());
    if (std::abs(e2.jump()) > 1e-10 * scale)
        throw domain_violation(std::string(what) + ": second effort component not continuous at the interface");
}

inline InterfacePorts interface_ports(const PiecewiseField& e) {
    require_flux_continuity(e, "interface_ports");
    return {e.minus_limit()(1), e.minus_limit()(0) - e.plus_limit()(0)};
}

// P1 d/dz per side with P1 = [[0,-1],[-1,0]].
inline PiecewiseField apply_J(const PiecewiseField& e) {
    require_flux_continuity(e, "apply_J");
    PiecewiseField out = e;
    out.left = {-1.0 * e.left[1].derivative(), -1.0 * e.left[0].derivative()};
    out.right = {-1.0 * e.right[1].derivative(), -1.0 * e.right[0].derivative()};
    return out;
}

inline double l2_inner(const PiecewiseField& u, const PiecewiseField& v) {
    return side_integral(u.a, u.l, u.b, [&](bool plus, double z) { return u.on_side(plus, z).dot(v.on_side(plus, z)); });
}

// Trace ordered (e1(b), e2(b), e1(a), e2(a)).
inline Vec boundary_trace(const PiecewiseField& e) {
    Vec t(4);
    t << e.at(e.b), e.on_side(false, e.a);
    return t;
}

inline boundary::BoundaryPorts ports_of(const PiecewiseField& e) {
    return boundary::boundary_ports(boundary_trace(e), boundary::wave_Rext());
}

inline double skew_identity_residual(const PiecewiseField& e1, const PiecewiseField& e2) {
    const double lhs = l2_inner(apply_J(e1), e2) + l2_inner(e1, apply_J(e2));
    const Mat2 p1 = boundary::wave_P1();
    const double bracket = e1.at(e1.b).dot(p1 * e2.at(e2.b)) - e1.on_side(false, e1.a).dot(p1 * e2.on_side(false, e2.a));
    const double jumps = e1.minus_limit()(1) * (e2.plus_limit()(0) - e2.minus_limit()(0)) +
                         e2.minus_limit()(1) * (e1.plus_limit()(0) - e1.minus_limit()(0));
    return std::abs(lhs - bracket - jumps);
}

// Effort field of a random element of D(A) (or of the adjoint domain), cubic per side and component.
inline PiecewiseField sample_domain_element(const boundary::BoundaryConditionSpec& bc, const InterfaceSpec& ifc,
                                            double a, double b, unsigned seed, bool adjoint = false) {
    ifc.validate(a, b);
    if (bc.classification == boundary::Classification::invalid_rank || !bc.factored)
        throw std::invalid_argument("sample_domain_element: boundary conditions not valid");
    // Unknowns: side (left, right) x component x 4 coefficients; index = side*8 + comp*4 + power.
    auto idx = [](int side, int comp, int pw) { return side * 8 + comp * 4 + pw; };
    auto row_eval = [&](int side, int comp, double s) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(16);
        double v = 1.0;
        for (int k = 0; k < 4; ++k, v *= s) row(idx(side, comp, k)) = v;
        return row;
    };
    Mat cons = Mat::Zero(4, 16);
    // Continuity of the second effort at l.
    cons.row(0) = row_eval(0, 1, 0.0) - row_eval(1, 1, 0.0);
    // f_I = +-r e_I with f_I = e2(l), e_I = e1(l-) - e1(l+).
    const double sgn = adjoint ? -1.0 : 1.0;
    cons.row(1) = row_eval(0, 1, 0.0) - sgn * ifc.r * (row_eval(0, 0, 0.0) - row_eval(1, 0, 0.0));
    Mat trace_map(4, 16);
    trace_map << row_eval(1, 0, b - ifc.l), row_eval(1, 1, b - ifc.l), row_eval(0, 0, a - ifc.l), row_eval(0, 1, a - ifc.l);
    const Mat port_rel = adjoint ? boundary::adjoint_condition(bc) : bc.WB;
    cons.bottomRows(2) = port_rel * boundary::wave_Rext() * trace_map;

    const Mat free = null_space(cons);
    if (free.cols() != 12) throw numerical_failure("sample_domain_element: constraint system has unexpected rank");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vec xi(12);
    for (auto& v : xi) v = g(rng);
    const Vec c = free * xi;

    PiecewiseField e;
    e.a = a;
    e.b = b;
    e.l = ifc.l;
    for (int comp = 0; comp < 2; ++comp) {
        e.left[comp] = Poly(std::vector<double>(c.data() + idx(0, comp, 0), c.data() + idx(0, comp, 0) + 4));
        e.right[comp] = Poly(std::vector<double>(c.data() + idx(1, comp, 0), c.data() + idx(1, comp, 0) + 4));
    }
    return e;
}

// Test function with its partial derivatives, compactly supported in (a,b) x (0,tau).
struct SpaceTimeTest {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dz;
    std::function<double(double, double)> dt;
};

// Weak form of the transport law for the left indicator c(z,t) = [z < l(t)]:
// integral of c * dt(phi) against integral of -c * l'(t) * dz(phi), each by 64x64 tensor quadrature.
inline double color_transport_weak_residual(const MovingPath& path, double tau, double a, double b,
                                            const SpaceTimeTest& phi) {
    for (int i = 0; i <= 256; ++i) {
        const double lv = path(tau * i / 256.0);
        if (!(a < lv && lv < b)) throw domain_violation("color transport: interface path leaves (a, b)");
    }
    const double lhs = integrate(
        [&](double t) { return integrate([&](double z) { return phi.dt(z, t); }, a, path(t), 4); }, 0.0, tau, 4);
    const double rhs = integrate(
        [&](double t) {
            const double rate = path.rate(t);
            return -rate * integrate([&](double z) { return phi.dz(z, t); }, a, path(t), 4);
        },
        0.0, tau, 4);
    return std::abs(lhs - rhs);
}

}  // namespace porthamil::interface
