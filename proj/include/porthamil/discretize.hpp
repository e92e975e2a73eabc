#pragma once

#include "boundary.hpp"
#include "interface_ops.hpp"
#include "profile.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <ostream>

namespace porthamil::discretize {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using interface::InterfaceSpec;

// Per side: first component at cell centers, second at nodes; the node at l exists once per side.
struct StaggeredGrid {
    double a = -1.0, b = 1.0, l = 0.0;
    int n_minus = 4, n_plus = 4;
    double h_minus = 0.0, h_plus = 0.0;

    int cells(bool plus) const { return plus ? n_plus : n_minus; }
    double step(bool plus) const { return plus ? h_plus : h_minus; }
    double start(bool plus) const { return plus ? l : a; }
    double center(bool plus, int j) const { return start(plus) + (j + 0.5) * step(plus); }
    double node(bool plus, int k) const { return start(plus) + k * step(plus); }

    // Full layout: left cells, left nodes, right cells, right nodes.
    int cell_index(bool plus, int j) const { return plus ? 2 * n_minus + 1 + j : j; }
    int node_index(bool plus, int k) const { return plus ? 2 * n_minus + 1 + n_plus + k : n_minus + k; }
    int full_size() const { return 2 * n_minus + 2 * n_plus + 2; }
};

inline StaggeredGrid build_grid(double a, double b, double l, int n_minus, int n_plus) {
    if (n_minus < 4 || n_plus < 4) throw std::invalid_argument("build_grid: cell counts must be at least 4");
    if (!(a < l && l < b)) throw std::invalid_argument("build_grid: interface outside (a, b)");
    StaggeredGrid g{a, b, l, n_minus, n_plus, (l - a) / n_minus, (b - l) / n_plus};
    if (g.h_minus < 1e-12 || g.h_plus < 1e-12)
        throw std::invalid_argument("build_grid: counts >= 4 but cell width below 1e-12");
    return g;
}

enum class DofKind { cell, node, interface_node, boundary_node };

struct DofInfo {
    DofKind kind;
    bool plus;
    int index;
    double z;
};

struct DiscreteGenerator {
    StaggeredGrid grid;
    boundary::BoundaryConditionSpec bc;
    InterfaceSpec ifc;
    std::vector<DofInfo> layout;
    SpMat basis;       // full <- reduced
    Vec full_weight;   // quadrature weights of the full layout
    Vec full_q;        // coefficient value attached to each full entry
    Vec mass;          // diagonal of the reduced mass matrix
    SpMat stiff;       // mass * A, skew part plus boundary and interface closures
    SpMat A;

    // Closure data for reconstructing boundary traces.
    Mat2 trace_e1;     // e1(b), e1(a) rows of the kernel in trace coordinates
    Mat2 trace_e2;     // e2(b), e2(a) rows
    int boundary_rank = 0;
    int interface_dof = -1;
    double interface_scale = 0.0;

    int size() const { return static_cast<int>(mass.size()); }
};

inline DiscreteGenerator assemble_generator(const StaggeredGrid& g, const CoefficientProfile& p,
                                            const boundary::BoundaryConditionSpec& bc, const InterfaceSpec& ifc) {
    if (!boundary::generates_contraction(bc.classification) || !bc.factored)
        throw std::invalid_argument("assemble_generator: boundary conditions do not define a dissipative operator");
    if (!p.diagonal) throw std::invalid_argument("assemble_generator: only diagonal coefficient profiles are supported");
    if (std::abs(ifc.l - g.l) > 1e-14 * (g.b - g.a)) throw std::invalid_argument("assemble_generator: grid and interface disagree");
    ifc.validate(g.a, g.b);

    DiscreteGenerator gen;
    gen.grid = g;
    gen.bc = bc;
    gen.ifc = ifc;
    const int F = g.full_size();
    gen.full_weight = Vec::Zero(F);
    gen.full_q = Vec::Zero(F);
    std::vector<Triplet> kt;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        const int n = g.cells(plus);
        const double h = g.step(plus);
        for (int j = 0; j < n; ++j) {
            const int c = g.cell_index(plus, j);
            gen.full_weight(c) = h;
            gen.full_q(c) = p.q(plus, g.center(plus, j))(0, 0);
            // d/dt x1_j = -(e2_{j+1} - e2_j) / h, skew pairing with the node rows
            kt.emplace_back(c, g.node_index(plus, j), 1.0);
            kt.emplace_back(c, g.node_index(plus, j + 1), -1.0);
            kt.emplace_back(g.node_index(plus, j), c, -1.0);
            kt.emplace_back(g.node_index(plus, j + 1), c, 1.0);
        }
        for (int k = 0; k <= n; ++k) {
            const int nd = g.node_index(plus, k);
            gen.full_weight(nd) = (k == 0 || k == n) ? 0.5 * h : h;
            gen.full_q(nd) = p.q(plus, g.node(plus, k))(1, 1);
        }
    }
    SpMat K(F, F);
    K.setFromTriplets(kt.begin(), kt.end());

    std::vector<Triplet> bt;
    std::vector<Triplet> gt;
    int col = 0;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        for (int j = 0; j < g.cells(plus); ++j) {
            bt.emplace_back(g.cell_index(plus, j), col, 1.0);
            gen.layout.push_back({DofKind::cell, plus, j, g.center(plus, j)});
            ++col;
        }
        for (int k = 1; k < g.cells(plus); ++k) {
            bt.emplace_back(g.node_index(plus, k), col, 1.0);
            gen.layout.push_back({DofKind::node, plus, k, g.node(plus, k)});
            ++col;
        }
    }

    // Interface: one shared dof carrying the continuous second effort, or none when it must vanish.
    const int il = g.node_index(false, g.n_minus), ir = g.node_index(true, 0);
    if (ifc.r > 0) {
        const double wm = gen.full_weight(il), wp = gen.full_weight(ir);
        const double qm = gen.full_q(il), qp = gen.full_q(ir);
        const double qbar = (wm + wp) / (wm / qm + wp / qp);
        bt.emplace_back(il, col, qbar / qm);
        bt.emplace_back(ir, col, qbar / qp);
        gt.emplace_back(col, col, -qbar * qbar / ifc.r);
        gen.interface_dof = col;
        gen.interface_scale = qbar;
        gen.layout.push_back({DofKind::interface_node, false, g.n_minus, g.l});
        ++col;
    }

    // Boundary nodes, ordered (b, a): second efforts restricted to the admissible trace directions.
    const Mat t = boundary::kernel_in_traces(bc);
    gen.trace_e1 << t.row(0), t.row(2);
    gen.trace_e2 << t.row(1), t.row(3);
    const int nb = g.node_index(true, g.n_plus), na = g.node_index(false, 0);
    const Mat2 qn = Vec2(gen.full_q(nb), gen.full_q(na)).asDiagonal();
    const Mat2 wn = Vec2(gen.full_weight(nb), gen.full_weight(na)).asDiagonal();
    const Mat range = range_basis(gen.trace_e2);
    gen.boundary_rank = static_cast<int>(range.cols());
    Mat chat;
    if (gen.boundary_rank == 2) {
        chat = qn;
    } else if (gen.boundary_rank == 1) {
        const Vec c = range.col(0);
        const double qtil = c.dot(wn * c) / c.dot(qn.inverse() * wn * c);  // weighted harmonic mean
        chat = qtil * c;
    }
    if (gen.boundary_rank > 0) {
        const Mat2 d = Vec2(-1.0, 1.0).asDiagonal();
        const Mat pinv = gen.trace_e2.completeOrthogonalDecomposition().pseudoInverse();
        const Mat gb = chat.transpose() * d * gen.trace_e1 * pinv * chat;
        const Mat bn = qn.inverse() * chat;
        for (int i = 0; i < gen.boundary_rank; ++i) {
            if (bn(0, i) != 0.0) bt.emplace_back(nb, col + i, bn(0, i));
            if (bn(1, i) != 0.0) bt.emplace_back(na, col + i, bn(1, i));
            for (int j = 0; j < gen.boundary_rank; ++j) gt.emplace_back(col + i, col + j, gb(i, j));
            const bool at_a = gen.boundary_rank == 2 && i == 1;
            gen.layout.push_back({DofKind::boundary_node, !at_a, i, at_a ? g.a : g.b});
        }
        col += gen.boundary_rank;
    }

    gen.basis.resize(F, col);
    gen.basis.setFromTriplets(bt.begin(), bt.end());
    SpMat gmat(col, col);
    gmat.setFromTriplets(gt.begin(), gt.end());
    const Vec qw = gen.full_q.cwiseProduct(gen.full_weight);
    gen.mass = SpMat(gen.basis.transpose() * qw.asDiagonal() * gen.basis).diagonal();
    const SpMat qb = gen.full_q.asDiagonal() * gen.basis;
    gen.stiff = SpMat(qb.transpose() * K * qb) + gmat;
    gen.stiff.prune(0.0);
    gen.A = gen.mass.cwiseInverse().asDiagonal() * gen.stiff;
    return gen;
}

inline Vec full_state(const Vec& u, const DiscreteGenerator& gen) { return gen.basis * u; }

// Mass-weighted projection of full-layout values onto the constrained dofs.
inline Vec project_full(const Vec& xf, const DiscreteGenerator& gen) {
    const Vec qw = gen.full_q.cwiseProduct(gen.full_weight);
    return (gen.basis.transpose() * qw.cwiseProduct(xf)).cwiseQuotient(gen.mass);
}

// Point values of a state x(plus, z) at the full-layout positions.
inline Vec sample_full(const std::function<Vec2(bool, double)>& x, const StaggeredGrid& g) {
    Vec xf(g.full_size());
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        for (int j = 0; j < g.cells(plus); ++j) xf(g.cell_index(plus, j)) = x(plus, g.center(plus, j))(0);
        for (int k = 0; k <= g.cells(plus); ++k) xf(g.node_index(plus, k)) = x(plus, g.node(plus, k))(1);
    }
    return xf;
}

inline Vec sample_state(const std::function<Vec2(bool, double)>& x, const DiscreteGenerator& gen) {
    return project_full(sample_full(x, gen.grid), gen);
}

inline double discrete_energy(const Vec& u, const DiscreteGenerator& gen) {
    if (u.size() != gen.size()) throw std::invalid_argument("discrete_energy: layout mismatch");
    return 0.5 * u.dot(gen.mass.cwiseProduct(u));
}

inline Vec energy_gradient(const Vec& u, const DiscreteGenerator& gen) {
    if (u.size() != gen.size()) throw std::invalid_argument("energy_gradient: layout mismatch");
    return gen.mass.cwiseProduct(u);
}

struct DiscretePorts {
    Vec2 e_a = Vec2::Zero();  // (e1(a), e2(a))
    Vec2 e_b = Vec2::Zero();
    Vec2 f_boundary = Vec2::Zero();
    Vec2 e_boundary = Vec2::Zero();
    double f_I = 0.0;
    double e_I = 0.0;

    double supplied_power() const { return e_boundary.dot(f_boundary) - e_I * f_I; }
};

inline DiscretePorts discrete_ports(const Vec& u, const DiscreteGenerator& gen) {
    const auto& g = gen.grid;
    const Vec xf = full_state(u, gen);
    const Vec ef = gen.full_q.cwiseProduct(xf);
    DiscretePorts out;
    const int nb = g.node_index(true, g.n_plus), na = g.node_index(false, 0);
    const Vec2 en(ef(nb), ef(na));
    const Vec2 s(ef(g.cell_index(true, g.n_plus - 1)), -ef(g.cell_index(false, 0)));
    const Mat2 d = Vec2(-1.0, 1.0).asDiagonal();
    const Mat2 qn = Vec2(gen.full_q(nb), gen.full_q(na)).asDiagonal();
    const Mat2 wn = Vec2(gen.full_weight(nb), gen.full_weight(na)).asDiagonal();
    const Mat pinv = gen.trace_e2.completeOrthogonalDecomposition().pseudoInverse();
    Vec lam = pinv * en;
    if (gen.boundary_rank < 2) {
        // Multiplier along ker(trace_e2): node rates must stay within the admissible directions.
        const Mat ker = null_space(gen.trace_e2);
        const Mat perp = null_space(range_basis(gen.trace_e2).transpose());
        const Mat scale = qn * wn.inverse();
        const Mat lhs = perp.transpose() * scale * d * gen.trace_e1 * ker;
        const Vec rhs = -perp.transpose() * scale * (s + d * gen.trace_e1 * lam);
        lam += ker * lhs.completeOrthogonalDecomposition().solve(rhs);
    }
    const Vec2 e1 = gen.trace_e1 * lam;
    out.e_b = Vec2(e1(0), en(0));
    out.e_a = Vec2(e1(1), en(1));
    Vec tr(4);
    tr << out.e_b, out.e_a;
    const auto ports = boundary::boundary_ports(tr, boundary::wave_Rext());
    out.f_boundary = ports.f;
    out.e_boundary = ports.e;
    if (gen.interface_dof >= 0) {
        out.f_I = gen.interface_scale * u(gen.interface_dof);
        out.e_I = out.f_I / gen.ifc.r;
    } else {
        out.f_I = 0.0;
        out.e_I = ef(g.cell_index(false, g.n_minus - 1)) - ef(g.cell_index(true, 0));
    }
    return out;
}

struct DissipativityVerdict {
    bool pass = false;
    double max_symmetric_eig = 0.0;
    double condition = 0.0;
    std::string reason;
};

inline DissipativityVerdict dissipativity_spectrum_check(const DiscreteGenerator& gen) {
    DissipativityVerdict v;
    const Mat s = Mat(gen.stiff);
    v.max_symmetric_eig = max_sym_eig(s);
    const Mat resolvent = Mat(gen.mass.asDiagonal()) - s;  // mass (I - A)
    const Vec sv = singular_values(resolvent);
    v.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    const double tol = 1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff());
    v.pass = v.max_symmetric_eig <= tol && std::isfinite(v.condition) && v.condition < 1e14;
    if (!v.pass) v.reason = v.max_symmetric_eig > tol ? "positive symmetric part" : "I - A not invertible";
    return v;
}

// Verdict for a configuration that may not even admit assembly.
inline DissipativityVerdict dissipativity_spectrum_check(const StaggeredGrid& g, const CoefficientProfile& p,
                                                         const boundary::BoundaryConditionSpec& bc,
                                                         const InterfaceSpec& ifc) {
    try {
        return dissipativity_spectrum_check(assemble_generator(g, p, bc, ifc));
    } catch (const std::invalid_argument& e) {
        DissipativityVerdict v;
        v.pass = false;
        v.reason = e.what();
        return v;
    }
}

inline std::vector<cplx> generator_eigenvalues(const DiscreteGenerator& gen) {
    Eigen::EigenSolver<Mat> es(Mat(gen.A), false);
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(), [](cplx x, cplx y) { return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag(); });
    return out;
}

// Solves (lambda - A) u = projected y for the reduced state.
inline Vec discrete_resolve(double lambda, const std::function<Vec2(bool, double)>& y, const DiscreteGenerator& gen) {
    const Vec rhs = gen.mass.cwiseProduct(sample_state(y, gen));
    SpMat op = -gen.stiff;
    for (int i = 0; i < gen.size(); ++i) op.coeffRef(i, i) += lambda * gen.mass(i);
    Eigen::SparseLU<SpMat> lu(op);
    if (lu.info() != Eigen::Success) throw numerical_failure("discrete_resolve: factorization failed");
    return lu.solve(rhs);
}

// Discrete energy norm of full-layout values with coefficients taken relative to interface position l_ref.
inline double full_energy_norm(const Vec& xf, const StaggeredGrid& g, const CoefficientProfile& p, double l_ref) {
    double acc = 0.0;
    for (int side = 0; side < 2; ++side) {
        const bool plus = side == 1;
        for (int j = 0; j < g.cells(plus); ++j) {
            const double z = g.center(plus, j);
            const double v = xf(g.cell_index(plus, j));
            acc += g.step(plus) * p.active(z, l_ref)(0, 0) * v * v;
        }
        for (int k = 0; k <= g.cells(plus); ++k) {
            const double z = g.node(plus, k);
            const double w = (k == 0 || k == g.cells(plus)) ? 0.5 * g.step(plus) : g.step(plus);
            const double v = xf(g.node_index(plus, k));
            // A node at the reference point is charged to the side it belongs to.
            const Mat2 q = (z == l_ref) ? p.q(plus, z) : p.active(z, l_ref);
            acc += w * q(1, 1) * v * v;
        }
    }
    return std::sqrt(0.5 * acc);
}

// Least-squares slope of log(error) against log(h).
inline double convergence_order(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() < 3 || h.size() != err.size()) throw std::invalid_argument("convergence_order: need at least 3 levels");
    const auto n = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(std::max(err[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// True when every error sits at the rounding floor, so no order can be measured.
inline bool at_rounding_floor(const std::vector<double>& err, double floor = 1e-12) {
    return std::all_of(err.begin(), err.end(), [&](double e) { return e <= floor; });
}

inline void write_triplets(std::ostream& os, const SpMat& m) {
    os.precision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace porthamil::discretize
