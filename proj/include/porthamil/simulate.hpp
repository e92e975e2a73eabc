#pragma once

#include "analytic.hpp"
#include "discretize.hpp"

#include <Eigen/SparseLU>

#include <optional>
#include <ostream>
#include <random>

namespace porthamil::simulate {

using discretize::DiscreteGenerator;
using discretize::SpMat;

struct Scenario {
    CoefficientProfile profile;
    Mat WB;
    double r = 0.0;
    MovingPath path;                                // Kind::fixed means a stationary interface at l0
    std::function<Vec2(bool, double)> initial;      // state x(plus, z); plus selects the right-hand side
    double dt = 0.0;
    double t_end = 0.0;
    int n_minus = 0;
    int n_plus = 0;
    std::optional<double> reference;                // interface position for the reference norm; defaults to l(0)

    double reference_point() const { return reference.value_or(path(0.0)); }

    void validate() const {
        if (!(dt > 0)) throw std::invalid_argument("scenario: dt must be positive");
        if (!(t_end >= 0)) throw std::invalid_argument("scenario: t_end must be nonnegative");
        if (!initial) throw std::invalid_argument("scenario: initial field missing");
        const auto bc = boundary::classify_conditions(WB, r);
        if (!boundary::generates_contraction(bc.classification))
            throw std::invalid_argument("scenario: boundary classification is " + boundary::to_string(bc.classification));
        const double hmax = std::max((path(0.0) - profile.a) / n_minus, (profile.b - path(0.0)) / n_plus);
        const auto [lo, hi] = path.range(t_end);
        if (!(lo > profile.a + 2 * hmax && hi < profile.b - 2 * hmax))
            throw std::invalid_argument("scenario: interface path comes within two cell widths of the boundary");
    }
};

struct Record {
    double t = 0.0;
    double H = 0.0;
    Vec2 fd = Vec2::Zero();
    Vec2 ed = Vec2::Zero();
    double fI = 0.0;
    double eI = 0.0;
    double balance_residual = 0.0;
    Vec2 trace_a = Vec2::Zero();
    Vec2 trace_b = Vec2::Zero();
};

struct BoundCertificate {
    bool evaluated = false;
    bool held = true;
    double omega = 0.0;
    double worst_ratio = 0.0;  // max over steps of norm / allowed bound
    std::string note;
};

struct TimeSeries {
    std::vector<Record> records;
    std::vector<double> reference_norm;  // discrete norm in the reference coefficients, per record
    BoundCertificate bound;
    bool moving = false;
    Vec final_state;
    std::optional<DiscreteGenerator> final_generator;

    double max_balance_residual() const {
        double m = 0.0;
        for (const auto& r : records) m = std::max(m, r.balance_residual);
        return m;
    }
};

// Cayley step (M - dt/2 S) u' = (M + dt/2 S) u with the factorization kept for reuse.
class MidpointStepper {
public:
    MidpointStepper(const DiscreteGenerator& gen, double dt) : dt_(dt) {
        if (!(dt > 0)) throw std::invalid_argument("step_midpoint: dt must be positive");
        SpMat lhs = -0.5 * dt * gen.stiff;
        rhs_ = 0.5 * dt * gen.stiff;
        for (int i = 0; i < gen.size(); ++i) {
            lhs.coeffRef(i, i) += gen.mass(i);
            rhs_.coeffRef(i, i) += gen.mass(i);
        }
        lhs.makeCompressed();
        lu_.compute(lhs);
        if (lu_.info() != Eigen::Success) throw numerical_failure("step_midpoint: factorization failed");
    }

    Vec step(const Vec& u) const {
        Vec out = lu_.solve(rhs_ * u);
        if (lu_.info() != Eigen::Success || !out.allFinite()) throw numerical_failure("step_midpoint: solve failed");
        return out;
    }

    double dt() const { return dt_; }

private:
    double dt_;
    SpMat rhs_;
    Eigen::SparseLU<SpMat> lu_;
};

inline Vec step_midpoint(const Vec& u, const DiscreteGenerator& gen, double dt) {
    if (u.size() != gen.size()) throw std::invalid_argument("step_midpoint: layout mismatch");
    return MidpointStepper(gen, dt).step(u);
}

namespace detail {

inline double interpolate(const std::vector<double>& z, const std::vector<double>& v, double x) {
    if (z.size() == 1) return v[0];
    auto it = std::upper_bound(z.begin(), z.end(), x);
    std::size_t i = it == z.begin() ? 0 : static_cast<std::size_t>(it - z.begin()) - 1;
    i = std::min(i, z.size() - 2);
    const double s = (x - z[i]) / (z[i + 1] - z[i]);
    return (1.0 - s) * v[i] + s * v[i + 1];
}

inline Record make_record(double t, const Vec& u, const DiscreteGenerator& gen) {
    const auto ports = discretize::discrete_ports(u, gen);
    Record rec;
    rec.t = t;
    rec.H = discretize::discrete_energy(u, gen);
    rec.fd = ports.f_boundary;
    rec.ed = ports.e_boundary;
    rec.fI = ports.f_I;
    rec.eI = ports.e_I;
    rec.trace_a = ports.e_a;
    rec.trace_b = ports.e_b;
    return rec;
}

inline DiscreteGenerator generator_at(const Scenario& scn, const boundary::BoundaryConditionSpec& bc, double l) {
    const auto g = discretize::build_grid(scn.profile.a, scn.profile.b, l, scn.n_minus, scn.n_plus);
    return discretize::assemble_generator(g, scn.profile, bc, {l, scn.r});
}

}  // namespace detail

// Moves a reduced state onto another grid: piecewise-linear reconstruction per old side, then projection.
inline Vec transfer_state(const Vec& u, const DiscreteGenerator& from, const DiscreteGenerator& to) {
    const auto& go = from.grid;
    const Vec xf = discretize::full_state(u, from);
    std::array<std::vector<double>, 2> cz, cv, nz, nv;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        for (int j = 0; j < go.cells(plus); ++j) {
            cz[side].push_back(go.center(plus, j));
            cv[side].push_back(xf(go.cell_index(plus, j)));
        }
        for (int k = 0; k <= go.cells(plus); ++k) {
            nz[side].push_back(go.node(plus, k));
            nv[side].push_back(xf(go.node_index(plus, k)));
        }
    }
    auto field = [&](bool plus_new, double z) -> Vec2 {
        const int s = z < go.l ? 0 : (z > go.l ? 1 : (plus_new ? 1 : 0));
        return {detail::interpolate(cz[s], cv[s], z), detail::interpolate(nz[s], nv[s], z)};
    };
    return discretize::sample_state(field, to);
}

// Discrete energy norm with the coefficients frozen at the reference interface position.
inline double reference_norm(const Vec& u, const DiscreteGenerator& gen, const CoefficientProfile& p, double l_ref) {
    return discretize::full_energy_norm(discretize::full_state(u, gen), gen.grid, p, l_ref);
}

inline TimeSeries simulate_moving(const Scenario& scn) {
    scn.validate();
    const auto bc = boundary::classify_conditions(scn.WB, scn.r);
    const double l_ref = scn.reference_point();
    TimeSeries out;
    out.moving = scn.path.kind != MovingPath::Kind::fixed;

    if (out.moving) {
        analytic::FamilySpec fam{scn.path, scn.profile, scn.WB, scn.r, scn.t_end, l_ref};
        try {
            out.bound.omega = analytic::family_omega(fam).omega;
            out.bound.evaluated = true;
        } catch (const domain_violation& e) {
            out.bound.note = std::string("bound check skipped: ") + e.what();
        }
    }

    DiscreteGenerator gen = detail::generator_at(scn, bc, scn.path(0.0));
    Vec u = discretize::sample_state(scn.initial, gen);
    const int steps = static_cast<int>(std::llround(scn.t_end / scn.dt));
    out.records.reserve(steps + 1);
    out.records.push_back(detail::make_record(0.0, u, gen));
    out.reference_norm.push_back(reference_norm(u, gen, scn.profile, l_ref));
    const double norm0 = out.reference_norm.front();
    double hmax = std::max(gen.grid.h_minus, gen.grid.h_plus);

    std::optional<MidpointStepper> stepper;
    for (int k = 0; k < steps; ++k) {
        const double t0 = k * scn.dt;
        const double l_mid = scn.path(t0 + 0.5 * scn.dt);
        if (l_mid != gen.grid.l) {
            DiscreteGenerator next = detail::generator_at(scn, bc, l_mid);
            u = transfer_state(u, gen, next);
            gen = std::move(next);
            stepper.reset();
            hmax = std::max({hmax, gen.grid.h_minus, gen.grid.h_plus});
        }
        if (!stepper) stepper.emplace(gen, scn.dt);
        const double h_before = discretize::discrete_energy(u, gen);
        const Vec next = stepper->step(u);
        const Vec mid = 0.5 * (u + next);
        const double power = mid.dot(gen.stiff * mid);
        u = next;
        Record rec = detail::make_record((k + 1) * scn.dt, u, gen);
        rec.balance_residual = std::abs((rec.H - h_before) / scn.dt - power);
        out.records.push_back(rec);
        const double nrm = reference_norm(u, gen, scn.profile, l_ref);
        out.reference_norm.push_back(nrm);
        if (out.bound.evaluated) {
            const double allowed = std::exp(out.bound.omega * rec.t) * norm0 * (1.0 + 5.0 * hmax * hmax * (k + 1));
            const double ratio = allowed > 0 ? nrm / allowed : (nrm > 0 ? std::numeric_limits<double>::infinity() : 0.0);
            out.bound.worst_ratio = std::max(out.bound.worst_ratio, ratio);
            if (nrm > allowed) out.bound.held = false;
        }
    }
    out.final_state = u;
    out.final_generator = std::move(gen);
    return out;
}

inline TimeSeries simulate_fixed(const Scenario& scn) {
    if (scn.path.kind != MovingPath::Kind::fixed) throw std::invalid_argument("simulate_fixed: interface must be fixed");
    return simulate_moving(scn);
}

struct FluxResidual {
    double first = 0.0;   // conservation of the first state component
    double second = 0.0;  // analogue for the second component; zero when an end node is not interior
};

// Flux balance over the nodes k0..k1 of one side for a single step u0 -> u1.
inline FluxResidual subinterval_flux_residual(const DiscreteGenerator& gen, const Vec& u0, const Vec& u1, double dt,
                                              bool plus, int k0, int k1) {
    const auto& g = gen.grid;
    if (k0 > k1) std::swap(k0, k1);
    if (k0 < 0 || k1 > g.cells(plus))
        throw std::invalid_argument("subinterval_flux_residual: interval must lie on one side of the interface");
    FluxResidual res;
    if (k0 == k1) return res;
    const Vec x0 = discretize::full_state(u0, gen), x1 = discretize::full_state(u1, gen);
    const Vec em = gen.full_q.cwiseProduct(0.5 * (x0 + x1));
    const double h = g.step(plus);

    double mass1 = 0.0;
    for (int j = k0; j < k1; ++j) mass1 += h * (x1(g.cell_index(plus, j)) - x0(g.cell_index(plus, j)));
    const double flux1 = em(g.node_index(plus, k0)) - em(g.node_index(plus, k1));
    res.first = std::abs(mass1 / dt - flux1);

    if (k0 >= 1 && k1 <= g.cells(plus) - 1) {
        double mass2 = 0.0;
        for (int k = k0; k <= k1; ++k) {
            const double w = (k == k0 || k == k1) ? 0.5 * h : h;
            mass2 += w * (x1(g.node_index(plus, k)) - x0(g.node_index(plus, k)));
        }
        auto e1_node = [&](int k) { return 0.5 * (em(g.cell_index(plus, k - 1)) + em(g.cell_index(plus, k))); };
        res.second = std::abs(mass2 / dt - (e1_node(k0) - e1_node(k1)));
    }
    return res;
}

// Slope of log(H)/2 over the second half of the samples.
inline double decay_fit(const TimeSeries& series) {
    const auto& r = series.records;
    if (r.size() < 20) throw std::invalid_argument("decay_fit: need at least 20 samples");
    if (!(r.front().H > 0)) throw std::invalid_argument("decay_fit: initial energy must be positive");
    const std::size_t start = r.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(r.size() - start);
    for (std::size_t i = start; i < r.size(); ++i) {
        if (!(r[i].H > 0)) throw numerical_failure("decay_fit: nonpositive energy sample at t = " + std::to_string(r[i].t));
        const double y = 0.5 * std::log(r[i].H);
        sx += r[i].t;
        sy += y;
        sxx += r[i].t * r[i].t;
        sxy += r[i].t * y;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

struct TraceBound {
    double constant = 0.0;
    double boundary_integral = 0.0;
    double final_energy = 0.0;
    bool pass = false;
};

// Smallest C with H(tau) <= C * integral of |e(a)|^2 + |e(b)|^2 (trapezoid in time).
inline TraceBound trace_energy_bound_check(const TimeSeries& series) {
    TraceBound out;
    if (series.records.empty()) throw std::invalid_argument("trace_energy_bound_check: empty series");
    const auto& r = series.records;
    for (std::size_t i = 1; i < r.size(); ++i) {
        const double f0 = r[i - 1].trace_a.squaredNorm() + r[i - 1].trace_b.squaredNorm();
        const double f1 = r[i].trace_a.squaredNorm() + r[i].trace_b.squaredNorm();
        out.boundary_integral += 0.5 * (r[i].t - r[i - 1].t) * (f0 + f1);
    }
    out.final_energy = r.back().H;
    if (out.boundary_integral == 0.0) {
        if (out.final_energy > 0.0)
            throw domain_violation("trace_energy_bound_check: energy persists without boundary trace activity");
        out.pass = true;
        return out;
    }
    out.constant = out.final_energy / out.boundary_integral;
    out.pass = std::isfinite(out.constant) && out.constant < 1e6;
    return out;
}

inline void write_csv(std::ostream& os, const TimeSeries& series) {
    os << "t,H,fd1,fd2,ed1,ed2,fI,eI,balance_residual,trace_a1,trace_a2,trace_b1,trace_b2\n";
    const auto old = os.precision(17);
    for (const auto& r : series.records)
        os << r.t << ',' << r.H << ',' << r.fd(0) << ',' << r.fd(1) << ',' << r.ed(0) << ',' << r.ed(1) << ',' << r.fI
           << ',' << r.eI << ',' << r.balance_residual << ',' << r.trace_a(0) << ',' << r.trace_a(1) << ','
           << r.trace_b(0) << ',' << r.trace_b(1) << '\n';
    os.precision(old);
}

// Resolvent products of the frozen family on a uniform grid whose interface snaps to the nearest node.
class FamilyResolvents {
public:
    FamilyResolvents(const analytic::FamilySpec& fam, int cells) : fam_(fam), cells_(cells) {
        if (fam.r != 0.0) throw domain_violation("family resolvents: interface must be lossless (r = 0)");
        bc_ = boundary::classify_conditions(fam.WB, 0.0);
        h_ = (fam.profile.b - fam.profile.a) / cells;
        ref_node_ = snap(fam.reference);
        // Reference weights: cells by their centers, nodes by position with the reference node split evenly.
        const auto& p = fam.profile;
        const double lr = node_z(ref_node_);
        weight_ = Vec(size());
        for (int j = 0; j < cells; ++j) weight_(j) = h_ * p.active(p.a + (j + 0.5) * h_, lr)(0, 0);
        for (int k = 0; k <= cells; ++k) {
            const double w = (k == 0 || k == cells) ? 0.5 * h_ : h_;
            const double z = node_z(k);
            const double q = k == ref_node_ ? 0.5 * (p.qminus(z)(1, 1) + p.qplus(z)(1, 1)) : p.active(z, lr)(1, 1);
            weight_(cells + k) = w * q;
        }
    }

    int size() const { return 2 * cells_ + 1; }

    // Dense resolvent (lambda - A_h(t))^{-1} in canonical coordinates.
    Mat resolvent(double lambda, double t) const {
        const int node = snap(fam_.path(t));
        const double l = node_z(node);
        const auto g = discretize::build_grid(fam_.profile.a, fam_.profile.b, l, node, cells_ - node);
        const auto gen = discretize::assemble_generator(g, fam_.profile, bc_, {l, 0.0});
        Mat embed = Mat::Zero(g.full_size(), size());
        for (int j = 0; j < cells_; ++j) embed(j < node ? g.cell_index(false, j) : g.cell_index(true, j - node), j) = 1.0;
        for (int k = 0; k <= cells_; ++k) {
            if (k <= node) embed(g.node_index(false, k), cells_ + k) = 1.0;
            if (k >= node) embed(g.node_index(true, k - node), cells_ + k) = 1.0;
        }
        Mat extract = embed.transpose();
        // The interface node is counted once when reading back.
        extract(cells_ + node, g.node_index(true, 0)) = 0.0;
        const Mat basis = Mat(gen.basis);
        const Mat qw = gen.full_q.cwiseProduct(gen.full_weight).asDiagonal();
        Mat op = -Mat(gen.stiff);
        op.diagonal() += lambda * gen.mass;
        const Mat load = basis.transpose() * qw * embed;
        const Eigen::PartialPivLU<Mat> lu(op);
        return extract * basis * lu.solve(load);
    }

    // Norm of the product R(t_k) ... R(t_1) in the reference energy norm.
    double product_norm(double lambda, const std::vector<double>& times) const {
        Mat prod = Mat::Identity(size(), size());
        for (double t : times) prod = resolvent(lambda, t) * prod;
        const Vec s = weight_.cwiseSqrt();
        const Mat scaled = s.asDiagonal() * prod * s.cwiseInverse().asDiagonal();
        return singular_values(scaled)(0);
    }

private:
    int snap(double l) const {
        const int k = static_cast<int>(std::lround((l - fam_.profile.a) / h_));
        if (k < 4 || k > cells_ - 4) throw domain_violation("family resolvents: interface too close to the boundary");
        return k;
    }
    double node_z(int k) const { return fam_.profile.a + k * h_; }

    analytic::FamilySpec fam_;
    int cells_;
    double h_ = 0.0;
    int ref_node_ = 0;
    boundary::BoundaryConditionSpec bc_;
    Vec weight_;
};

}  // namespace porthamil::simulate
