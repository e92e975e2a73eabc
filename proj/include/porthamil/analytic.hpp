#pragma once

#include "boundary.hpp"
#include "interface_ops.hpp"
#include "profile.hpp"

#include <boost/numeric/odeint.hpp>

namespace porthamil::analytic {

using interface::InterfaceSpec;
using interface::PiecewiseField;

namespace detail {

// exp(A) for a complex 2x2 matrix via the Cayley-Hamilton closed form.
inline CMat2 expm2(const CMat2& A) {
    const cplx mu = 0.5 * A.trace();
    const CMat2 B = A - mu * CMat2::Identity();
    const cplx delta = std::sqrt(-B.determinant());
    const cplx sh = std::abs(delta) < 1e-8 ? cplx(1.0) + delta * delta / 6.0 : std::sinh(delta) / delta;
    return std::exp(mu) * (std::cosh(delta) * CMat2::Identity() + sh * B);
}

inline CMat2 generator_at(const CoefficientProfile& p, bool plus, double z, cplx lambda) {
    const Mat2 q = p.q(plus, z);
    const Mat2 qinv = q.inverse();
    return qinv.cast<cplx>() * (lambda * boundary::wave_P1().cast<cplx>() - p.dq(plus, z).cast<cplx>());
}

using State8 = std::array<double, 8>;

inline auto controlled_stepper() {
    using namespace boost::numeric::odeint;
    return make_controlled(1e-12, 1e-10, runge_kutta_dopri5<State8>());
}

}  // namespace detail

// Fundamental matrix of x' = Q^{-1}(lambda P1 - Q') x on one side, mapping x(s) to x(z).
inline CMat2 transition_matrix(bool plus, double z, double s, cplx lambda, const CoefficientProfile& p) {
    if (z == s) return CMat2::Identity();
    if (p.constant) return detail::expm2((z - s) * detail::generator_at(p, plus, s, lambda));
    detail::State8 st{1, 0, 0, 0, 0, 0, 1, 0};  // column-major, (re, im) pairs
    auto rhs = [&](const detail::State8& x, detail::State8& dx, double zz) {
        const CMat2 f = detail::generator_at(p, plus, zz, lambda);
        CMat2 X;
        X << cplx(x[0], x[1]), cplx(x[4], x[5]), cplx(x[2], x[3]), cplx(x[6], x[7]);
        const CMat2 d = f * X;
        dx = {d(0, 0).real(), d(0, 0).imag(), d(1, 0).real(), d(1, 0).imag(),
              d(0, 1).real(), d(0, 1).imag(), d(1, 1).real(), d(1, 1).imag()};
    };
    const std::size_t steps =
        boost::numeric::odeint::integrate_adaptive(detail::controlled_stepper(), rhs, st, s, z, (z - s) / 64.0);
    if (steps > 2000000) throw numerical_failure("transition_matrix: step size underflow");
    CMat2 X;
    X << cplx(st[0], st[1]), cplx(st[4], st[5]), cplx(st[2], st[3]), cplx(st[6], st[7]);
    return X;
}

// Matrix mapping x(l-) to x(l+) for an interface with passivity constant r > 0.
inline Mat2 interface_transfer(const CoefficientProfile& p, const InterfaceSpec& ifc) {
    if (!(ifc.r > 0)) throw std::invalid_argument("interface_transfer: requires r > 0");
    const Mat2 qp = p.qplus(ifc.l);
    const Mat2 qm = p.qminus(ifc.l);
    const double p11 = qp(0, 0), p12 = qp(0, 1), p22 = qp(1, 1);
    if (p11 == 0.0) throw std::invalid_argument("interface_transfer: vanishing (1,1) entry on the right side");
    const double det = p11 * p22 - p12 * p12;
    const double t1 = p11 / det * (1.0 + p12 / (ifc.r * p11));
    const double t2 = -p12 / det;
    const double t3 = -(1.0 + ifc.r * p12 * t1) / (ifc.r * p11);
    const double t4 = (1.0 - p12 * t2) / p11;
    Mat2 c;
    c << t3 * qm(0, 1) + t4 * qm(0, 0), t3 * qm(1, 1) + t4 * qm(0, 1),
         t1 * qm(0, 1) + t2 * qm(0, 0), t1 * qm(1, 1) + t2 * qm(0, 1);
    return c;
}

// Dense samples of a solution on one side, evaluated by cubic Hermite interpolation.
struct SideSamples {
    double lo = 0.0, hi = 0.0;
    std::vector<Vec2> val;
    std::vector<Vec2> der;

    int intervals() const { return static_cast<int>(val.size()) - 1; }
    double step() const { return (hi - lo) / intervals(); }

    Vec2 operator()(double z) const {
        const double h = step();
        int k = static_cast<int>(std::floor((z - lo) / h));
        k = std::clamp(k, 0, intervals() - 1);
        const double t = (z - lo) / h - k;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * val[k] + (t3 - 2 * t2 + t) * h * der[k] + (-2 * t3 + 3 * t2) * val[k + 1] +
               (t3 - t2) * h * der[k + 1];
    }
};

struct ResolventSolution {
    double lambda = 0.0;
    double l = 0.0;
    SideSamples left, right;
    Vec2 x_a = Vec2::Zero();
    Vec2 x_lplus = Vec2::Zero();
    double residual = 0.0;
    double conditioning = 0.0;

    Vec2 phi(double z) const { return z < l ? left(z) : right(z); }
    Vec2 phi_side(bool plus, double z) const { return plus ? right(z) : left(z); }
};

namespace detail {

using State6 = std::array<double, 6>;  // particular solution, then the two fundamental columns

// One shooting segment: local fundamental matrix and particular solution, both started at the segment origin.
struct Segment {
    std::vector<double> z;
    std::vector<Vec2> particular;
    std::vector<Mat2> fundamental;
};

using SideFlow = std::vector<Segment>;

// Number of segments keeping the growth exp(rate * length) per segment below e.
inline int segment_count(const CoefficientProfile& p, bool plus, double lo, double hi, double lambda) {
    double rate = 0.0;
    for (int i = 0; i <= 8; ++i) {
        const double z = lo + (hi - lo) * i / 8.0;
        rate = std::max(rate, generator_at(p, plus, z, lambda).real().operatorNorm());
    }
    return std::max(1, static_cast<int>(std::ceil(rate * (hi - lo))));
}

inline Segment constant_segment(const CoefficientProfile& p, bool plus, double lambda,
                                const std::function<Vec2(bool, double)>& y, const std::vector<double>& times) {
    // Exact propagator per interval; the forcing enters through 16-point Gauss quadrature.
    using boost::math::quadrature::gauss;
    const double lo = times.front();
    const Mat2 f = generator_at(p, plus, lo, lambda).real();
    const Mat2 g = -p.q(plus, lo).inverse() * boundary::wave_P1();
    const double step = times[1] - times[0], half = 0.5 * step;
    auto prop = [&](double dz) -> Mat2 { return expm2((dz * f).cast<cplx>()).real(); };
    const Mat2 one = prop(step);
    const auto& xs = gauss<double, 16>::abscissa();
    const auto& ws = gauss<double, 16>::weights();
    std::vector<std::pair<double, Mat2>> nodes;  // offset in the interval, weight times propagator to its end
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (double sgn : {1.0, -1.0}) {
            if (xs[i] == 0.0 && sgn < 0) continue;
            const double off = half + sgn * half * xs[i];
            nodes.emplace_back(off, ws[i] * half * prop(step - off));
        }
    Segment seg;
    Vec2 part = Vec2::Zero();
    seg.z.push_back(lo);
    seg.particular.push_back(part);
    seg.fundamental.push_back(Mat2::Identity());
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        Vec2 acc = Vec2::Zero();
        for (const auto& [off, w] : nodes) acc += w * (g * y(plus, times[k] + off));
        part = one * part + acc;
        seg.z.push_back(times[k + 1]);
        seg.particular.push_back(part);
        seg.fundamental.push_back(prop(times[k + 1] - lo));
    }
    return seg;
}

inline Segment ode_segment(const CoefficientProfile& p, bool plus, double lambda,
                           const std::function<Vec2(bool, double)>& y, const std::vector<double>& times) {
    using namespace boost::numeric::odeint;
    auto rhs = [&](const State6& x, State6& dx, double z) {
        const Mat2 qinv = p.q(plus, z).inverse();
        const Mat2 f = qinv * (lambda * boundary::wave_P1() - p.dq(plus, z));
        const Vec2 g = -qinv * boundary::wave_P1() * y(plus, z);
        const Vec2 dp = f * Vec2(x[0], x[1]) + g;
        const Vec2 c1 = f * Vec2(x[2], x[3]);
        const Vec2 c2 = f * Vec2(x[4], x[5]);
        dx = {dp(0), dp(1), c1(0), c1(1), c2(0), c2(1)};
    };
    Segment seg;
    State6 st{0, 0, 1, 0, 0, 1};
    integrate_times(make_controlled(1e-12, 1e-10, runge_kutta_dopri5<State6>()), rhs, st, times.begin(), times.end(),
                    (times[1] - times[0]) / 4.0, [&](const State6& x, double z) {
                        seg.z.push_back(z);
                        seg.particular.emplace_back(x[0], x[1]);
                        Mat2 f;
                        f << x[2], x[4], x[3], x[5];
                        seg.fundamental.push_back(f);
                    });
    return seg;
}

// Uniform nodes on [lo, hi] split into shooting segments sharing their end nodes.
inline SideFlow integrate_side(const CoefficientProfile& p, bool plus, double lo, double hi, double lambda,
                               const std::function<Vec2(bool, double)>& y, int intervals) {
    const int segs = std::min(segment_count(p, plus, lo, hi, lambda), intervals);
    const int per = (intervals + segs - 1) / segs;
    const int total = segs * per;
    SideFlow flow;
    for (int j = 0; j < segs; ++j) {
        std::vector<double> times(per + 1);
        for (int k = 0; k <= per; ++k) times[k] = lo + (hi - lo) * (j * per + k) / total;
        if (j == segs - 1) times.back() = hi;
        flow.push_back(p.constant ? constant_segment(p, plus, lambda, y, times) : ode_segment(p, plus, lambda, y, times));
    }
    return flow;
}

}  // namespace detail

// Solves (lambda I - A) phi = y for a state y given per side; lambda > 0.
inline ResolventSolution resolve(double lambda, const std::function<Vec2(bool, double)>& y, const CoefficientProfile& p,
                                 const boundary::BoundaryConditionSpec& bc, const InterfaceSpec& ifc,
                                 int intervals = 400) {
    if (!(lambda > 0)) throw std::invalid_argument("resolve: lambda must be positive");
    if (!boundary::generates_contraction(bc.classification))
        throw std::invalid_argument("resolve: boundary conditions do not define a dissipative operator");
    ifc.validate(p.a, p.b);
    const double a = p.a, b = p.b, l = ifc.l;
    const auto left = detail::integrate_side(p, false, a, l, lambda, y, intervals);
    const auto right = detail::integrate_side(p, true, l, b, lambda, y, intervals);
    ResolventSolution sol;
    sol.lambda = lambda;
    sol.l = l;
    const Mat wr = bc.WB * boundary::wave_Rext();
    const Mat2 qa = p.qminus(a), qb = p.qplus(b);
    const int sm = static_cast<int>(left.size()), sp = static_cast<int>(right.size());
    const int unknowns = 2 * (sm + sp);
    auto col = [&](bool plus, int j) { return 2 * (plus ? sm + j : j); };

    // Rows: segment continuity per side, interface coupling, boundary conditions.
    Mat sys = Mat::Zero(unknowns, unknowns);
    Vec rhs = Vec::Zero(unknowns);
    int row = 0;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        const auto& flow = plus ? right : left;
        for (int j = 0; j + 1 < static_cast<int>(flow.size()); ++j) {
            sys.block(row, col(plus, j), 2, 2) = flow[j].fundamental.back();
            sys.block(row, col(plus, j + 1), 2, 2) = -Mat2::Identity();
            rhs.segment(row, 2) = -flow[j].particular.back();
            row += 2;
        }
    }
    const Mat2 end_m = left.back().fundamental.back();
    const Vec2 part_m = left.back().particular.back();
    if (ifc.r > 0) {
        // x(l+) = C0 x(l-)
        const Mat2 c0 = interface_transfer(p, ifc);
        sys.block(row, col(false, sm - 1), 2, 2) = -c0 * end_m;
        sys.block(row, col(true, 0), 2, 2) = Mat2::Identity();
        rhs.segment(row, 2) = c0 * part_m;
    } else {
        // The continuous effort vanishes on both sides.
        sys.block(row, col(false, sm - 1), 1, 2) = (p.qminus(l) * end_m).row(1);
        rhs(row) = -(p.qminus(l) * part_m)(1);
        sys.block(row + 1, col(true, 0), 1, 2) = p.qplus(l).row(1);
    }
    row += 2;
    const Mat2 end_p = right.back().fundamental.back();
    const Vec2 part_p = right.back().particular.back();
    sys.block(row, col(true, sp - 1), 2, 2) = wr.leftCols(2) * qb * end_p;
    sys.block(row, col(false, 0), 2, 2) = wr.rightCols(2) * qa;
    rhs.segment(row, 2) = -wr.leftCols(2) * qb * part_p;

    const Vec sv = singular_values(sys);
    sol.conditioning = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(sol.conditioning) || sol.conditioning > 1e14)
        throw numerical_failure("resolve: boundary system singular (condition " + std::to_string(sol.conditioning) + ")");
    const Vec starts = sys.fullPivLu().solve(rhs);
    sol.x_a = starts.segment(col(false, 0), 2);
    sol.x_lplus = starts.segment(col(true, 0), 2);

    auto fill = [&](const detail::SideFlow& flow, bool plus, SideSamples& out) {
        out.lo = flow.front().z.front();
        out.hi = flow.back().z.back();
        for (int j = 0; j < static_cast<int>(flow.size()); ++j) {
            const auto& seg = flow[j];
            const Vec2 start = starts.segment(col(plus, j), 2);
            for (std::size_t k = (j == 0 ? 0 : 1); k < seg.z.size(); ++k) {
                const double z = seg.z[k];
                const Vec2 v = seg.fundamental[k] * start + seg.particular[k];
                const Mat2 qinv = p.q(plus, z).inverse();
                const Vec2 d = qinv * ((lambda * boundary::wave_P1() - p.dq(plus, z)) * v - boundary::wave_P1() * y(plus, z));
                out.val.push_back(v);
                out.der.push_back(d);
            }
        }
    };
    fill(left, false, sol.left);
    fill(right, true, sol.right);

    // Residual of the integrated equation Q phi |_s0^z = P1 int (lambda phi - y), plus interface and boundary checks.
    double scale = 0.0, res = 0.0;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        const SideSamples& s = plus ? sol.right : sol.left;
        Vec2 acc = Vec2::Zero();
        const Vec2 e0 = p.q(plus, s.lo) * s.val.front();
        for (int k = 0; k < s.intervals(); ++k) {
            const double z0 = s.lo + k * s.step(), z1 = z0 + s.step();
            acc += integrate([&](double z) -> Vec2 { return lambda * s(z) - y(plus, z); }, z0, z1);
            const Vec2 mismatch = p.q(plus, z1) * s.val[k + 1] - e0 - boundary::wave_P1() * acc;
            res = std::max(res, mismatch.lpNorm<Eigen::Infinity>());
            scale = std::max({scale, lambda * s.val[k + 1].lpNorm<Eigen::Infinity>(), y(plus, z1).lpNorm<Eigen::Infinity>()});
        }
    }
    const Vec2 em = p.qminus(l) * sol.left.val.back();
    const Vec2 ep = p.qplus(l) * sol.right.val.front();
    res = std::max(res, std::abs(em(1) - ep(1)));
    res = std::max(res, std::abs(em(1) - ifc.r * (em(0) - ep(0))));
    Vec tr(4);
    tr << qb * sol.right.val.back(), qa * sol.left.val.front();
    res = std::max(res, (wr * tr).lpNorm<Eigen::Infinity>());
    sol.residual = scale > 0 ? res / scale : res;
    return sol;
}

// lambda is an eigenvalue iff det of this matrix vanishes.
inline CMat2 characteristic_matrix(cplx lambda, const CoefficientProfile& p, const boundary::BoundaryConditionSpec& bc,
                                   const InterfaceSpec& ifc) {
    const double a = p.a, b = p.b, l = ifc.l;
    const Eigen::Matrix<cplx, 2, 4> wr = (bc.WB * boundary::wave_Rext()).cast<cplx>();
    const CMat2 lam_m = transition_matrix(false, l, a, lambda, p);
    const CMat2 lam_p = transition_matrix(true, b, l, lambda, p);
    const CMat2 qa = p.qminus(a).cast<cplx>(), qb = p.qplus(b).cast<cplx>();
    Eigen::Matrix<cplx, 4, 2> stack;
    if (ifc.r > 0) {
        const CMat2 e = lam_p * interface_transfer(p, ifc).cast<cplx>() * lam_m;
        stack << qb * e, qa;
    } else {
        const Eigen::Matrix<cplx, 1, 2> rho = (p.qminus(l).cast<cplx>() * lam_m).row(1);
        const CVec2 kappa(rho(1), -rho(0));
        const CVec2 xi = (p.qplus(l).inverse() * Vec2(1.0, 0.0)).cast<cplx>();
        stack << CVec2::Zero(), qb * lam_p * xi, qa * kappa, CVec2::Zero();
    }
    return wr * stack;
}

struct Region {
    double re_min = -1.0, re_max = 1.0, im_min = -10.0, im_max = 10.0;

    bool contains(cplx z, double pad = 0.0) const {
        return z.real() >= re_min - pad && z.real() <= re_max + pad && z.imag() >= im_min - pad &&
               z.imag() <= im_max + pad;
    }
    bool empty() const { return !(re_min < re_max && im_min < im_max); }
};

struct Spectrum {
    std::vector<cplx> eigenvalues;  // sorted by real part, descending
    double abscissa = -std::numeric_limits<double>::infinity();
    double method_agreement = 0.0;
    int dropped = 0;
};

// Newton refinement of det G from the given seeds; roots outside the region are dropped.
inline Spectrum spectrum_scan(const CoefficientProfile& p, const boundary::BoundaryConditionSpec& bc,
                              const InterfaceSpec& ifc, const Region& region, const std::vector<cplx>& seeds) {
    Spectrum out;
    if (region.empty()) return out;
    auto f = [&](cplx z) { return characteristic_matrix(z, p, bc, ifc).determinant(); };
    for (const cplx seed : seeds) {
        if (!region.contains(seed)) continue;
        cplx z = seed;
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const double h = 1e-6 * std::max(1.0, std::abs(z));
            const cplx fz = f(z);
            const cplx df = (f(z + h) - f(z - h)) / (2.0 * h);
            if (df == 0.0) break;
            cplx step = -fz / df;
            if (std::abs(step) > 0.5) step *= 0.5 / std::abs(step);
            z += step;
            if (std::abs(step) <= 1e-10) {
                ok = true;
                break;
            }
        }
        if (!ok || !region.contains(z, 1e-8)) {
            ++out.dropped;
            continue;
        }
        bool dup = false;
        for (const cplx e : out.eigenvalues)
            if (std::abs(e - z) <= 1e-8) dup = true;
        out.method_agreement = std::max(out.method_agreement, std::abs(z - seed));
        if (!dup) out.eigenvalues.push_back(z);
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](cplx x, cplx y) { return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag(); });
    if (!out.eigenvalues.empty()) out.abscissa = out.eigenvalues.front().real();
    return out;
}

// Membership of an effort field in the adjoint domain; throws naming the failed constraint.
inline void require_adjoint_domain(const PiecewiseField& ey, const boundary::BoundaryConditionSpec& bc,
                                   const InterfaceSpec& ifc) {
    interface::require_flux_continuity(ey, "adjoint domain");
    const double scale = std::max(1.0, ey.sup_norm());
    const auto ports = interface::interface_ports(ey);
    if (std::abs(ports.f_I + ifc.r * ports.e_I) > 1e-9 * scale)
        throw domain_violation("adjoint domain: interface relation f_I = -r e_I violated");
    const Vec fe = boundary::wave_Rext() * interface::boundary_trace(ey);
    if ((boundary::adjoint_condition(bc) * fe).norm() > 1e-9 * scale)
        throw domain_violation("adjoint domain: adjoint boundary relation violated");
}

// Applies the adjoint to a state y given through its effort Q y; returns the resulting state.
inline PiecewiseField adjoint_apply(const PiecewiseField& ey, const boundary::BoundaryConditionSpec& bc,
                                    const InterfaceSpec& ifc) {
    require_adjoint_domain(ey, bc, ifc);
    PiecewiseField out = interface::apply_J(ey);
    for (auto* side : {&out.left, &out.right})
        for (auto& c : *side) c = -1.0 * c;
    return out;
}

// Energy inner product <u, v>_Q = 1/2 int v^T Q u, with v passed through its effort Q v.
inline double energy_inner(const PiecewiseField& u_state, const PiecewiseField& v_effort) {
    return 0.5 * interface::l2_inner(u_state, v_effort);
}

// Squared energy norm of the state whose effort under Q_l is e, measured with Q_{ref}.
inline double energy_norm_sq(const PiecewiseField& e, const CoefficientProfile& p, double l_state, double l_ref) {
    std::vector<double> cuts{p.a, p.b, l_state, l_ref};
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        acc += integrate(
            [&](double z) {
                const Vec2 ez = e.on_side(z >= l_state, z);
                const Vec2 x = p.active(z, l_state).inverse() * ez;
                return 0.5 * x.dot(p.active(z, l_ref) * x);
            },
            cuts[i], cuts[i + 1], p.constant ? 1 : 8);
    }
    return acc;
}

// <A x, x> measured with Q_{ref}, x in D(A) at interface position l_state given through its effort.
inline double dissipation_form(const PiecewiseField& e, const CoefficientProfile& p, double l_state, double l_ref) {
    const PiecewiseField ax = interface::apply_J(e);
    std::vector<double> cuts{p.a, p.b, l_state, l_ref};
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        acc += integrate(
            [&](double z) {
                const bool plus = z >= l_state;
                const Vec2 x = p.active(z, l_state).inverse() * e.on_side(plus, z);
                return 0.5 * x.dot(p.active(z, l_ref) * ax.on_side(plus, z));
            },
            cuts[i], cuts[i + 1], p.constant ? 1 : 8);
    }
    return acc;
}

inline std::pair<double, double> norm_equivalence_bounds(const CoefficientProfile& p) {
    if (!(p.m > 0) || p.M < p.m) throw std::invalid_argument("norm_equivalence_bounds: invalid coercivity bounds");
    return {p.m / p.M, p.M / p.m};
}

// Averaged side ratios of the diagonal entries at the interface.
inline std::pair<double, double> interface_ratios(const CoefficientProfile& p, double l) {
    const Mat2 qm = p.qminus(l), qp = p.qplus(l);
    const double minus = 0.5 * (qm(0, 0) / qp(0, 0) + qm(1, 1) / qp(1, 1));
    const double plus = 0.5 * (qp(0, 0) / qm(0, 0) + qp(1, 1) / qm(1, 1));
    return {minus, plus};
}

struct FamilySpec {
    MovingPath path;
    CoefficientProfile profile;
    Mat WB;
    double r = 0.0;
    double tau = 1.0;
    double reference = 0.0;  // interface position defining the reference energy norm
};

struct FamilyOmega {
    double omega = 0.0;
    double omega1 = 0.0;  // first-order coefficient term
    double omega2 = 0.0;  // cross-term derivative
    double omega_left = 0.0;
    double omega_right = 0.0;
};

// Throws domain_violation naming the first failed family assumption.
inline void check_family_assumptions(const FamilySpec& fam) {
    const auto& p = fam.profile;
    if (!p.diagonal) throw domain_violation("family assumptions violated: coefficient matrices not diagonal");
    if (!p.dqminus || !p.dqplus) throw domain_violation("family assumptions violated: coefficient derivatives missing");
    const Mat2 r0m = p.qminus(fam.reference), r0p = p.qplus(fam.reference);
    if (std::abs(r0p(0, 0) / r0m(0, 0) - 1.0) > 1e-10)
        throw domain_violation("family assumptions violated: side ratio differs from 1 at the reference point");
    for (int i = 0; i < 128; ++i) {
        const double z = p.a + (p.b - p.a) * i / 127.0;
        const Mat2 qm = p.qminus(z), qp = p.qplus(z);
        if (std::abs(qp(0, 0) / qm(0, 0) - qp(1, 1) / qm(1, 1)) > 1e-10)
            throw domain_violation("family assumptions violated: diagonal side ratios differ at z = " + std::to_string(z));
    }
    if (fam.r != 0.0) throw domain_violation("family assumptions violated: interface must be lossless (r = 0)");
    const auto bc = boundary::classify_conditions(fam.WB, 0.0);
    if (!boundary::generates_contraction(bc.classification))
        throw domain_violation("family assumptions violated: boundary conditions not dissipative");
    const auto [lo, hi] = fam.path.range(fam.tau);
    if (!(p.a < lo && hi < p.b)) throw domain_violation("family assumptions violated: path leaves (a, b)");
}

inline FamilyOmega family_omega(const FamilySpec& fam) {
    check_family_assumptions(fam);
    const auto& p = fam.profile;
    const auto [plo, phi] = fam.path.range(fam.tau);
    const double lo = std::min(plo, fam.reference), hi = std::max(phi, fam.reference);
    const Mat2 p1 = boundary::wave_P1();
    FamilyOmega out;
    // Right of the reference point the active side is the left one, and vice versa.
    for (int region = 0; region < 2; ++region) {
        const bool right_region = region == 0;
        const double z0 = right_region ? fam.reference : lo;
        const double z1 = right_region ? hi : fam.reference;
        if (!(z1 > z0)) continue;
        const bool active_plus = !right_region;
        double w1 = -std::numeric_limits<double>::infinity(), w2 = w1;
        for (int i = 0; i < 256; ++i) {
            const double z = z0 + (z1 - z0) * i / 255.0;
            const Mat2 qa = p.q(active_plus, z), dqa = p.dq(active_plus, z);
            const Mat2 qr = p.q(!active_plus, z), dqr = p.dq(!active_plus, z);
            const Mat2 d = qr - qa, dd = dqr - dqa;
            const Mat2 t1 = d * p1 * dqa;
            const Mat2 cross_deriv = dd * p1 * qa + d * p1 * dqa;
            w1 = std::max(w1, max_gen_eig(t1, qr));
            w2 = std::max(w2, max_gen_eig(-cross_deriv, qr));
        }
        const double w = 1.01 * (std::max(0.0, w1) + 0.5 * std::max(0.0, w2));
        out.omega1 = std::max(out.omega1, w1);
        out.omega2 = std::max(out.omega2, w2);
        (right_region ? out.omega_right : out.omega_left) = w;
    }
    out.omega = std::max(out.omega_left, out.omega_right);
    return out;
}

}  // namespace porthamil::analytic
