#pragma once

#include "common.hpp"

namespace porthamil::boundary {

// Coefficients of the operator sum_i P_i d^i/dz^i acting on R^n valued functions.
struct OperatorSpec {
    int n = 0;
    int N = 0;
    std::vector<Mat> P;  // P[0] .. P[N]

    void validate() const {
        if (N < 1 || n < 1) throw std::invalid_argument("OperatorSpec: need n >= 1 and N >= 1");
        if (static_cast<int>(P.size()) != N + 1) throw std::invalid_argument("OperatorSpec: need N+1 coefficient matrices");
        for (int i = 0; i <= N; ++i) {
            if (P[i].rows() != n || P[i].cols() != n)
                throw std::invalid_argument("OperatorSpec: coefficient " + std::to_string(i) + " has wrong size");
            const double sign = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^(i+1)
            if ((P[i] - sign * P[i].transpose()).norm() > 1e-12 * std::max(1.0, P[i].norm()))
                throw std::invalid_argument("OperatorSpec: coefficient " + std::to_string(i) + " violates the symmetry rule");
        }
        if (numerical_rank(P[N], 1e-12) != n) throw std::invalid_argument("OperatorSpec: leading coefficient singular");
    }
};

// Block pattern: block (i, j) = (-1)^i P_{i+j+1} when i+j+1 <= N, else 0.
inline Mat block_pattern(const std::vector<Mat>& P, int n, int N) {
    Mat out = Mat::Zero(n * N, n * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const int k = i + j + 1;
            if (k <= N) out.block(i * n, j * n, n, n) = ((i % 2 == 0) ? 1.0 : -1.0) * P[k];
        }
    return out;
}

inline Mat build_P(const OperatorSpec& spec) {
    spec.validate();
    return block_pattern(spec.P, spec.n, spec.N);
}

inline Mat build_Rext(const Mat& P) {
    const auto k = P.rows();
    if (P.cols() != k) throw std::invalid_argument("build_Rext: matrix not square");
    if ((P - P.transpose()).norm() > 1e-12 * std::max(1.0, P.norm()))
        throw std::invalid_argument("build_Rext: matrix not symmetric");
    if (numerical_rank(P, 1e-12) != k) throw std::invalid_argument("build_Rext: singular matrix");
    Mat r(2 * k, 2 * k);
    const Mat id = Mat::Identity(k, k);
    r << P, -P, id, id;
    return r / std::sqrt(2.0);
}

// The first-order case with P1 = [[0,-1],[-1,0]] used by the interface model.
inline Mat2 wave_P1() { return (Mat2() << 0, -1, -1, 0).finished(); }

inline Mat wave_Rext() { return build_Rext(wave_P1()); }

struct BoundaryPorts {
    Vec f;
    Vec e;
};

inline BoundaryPorts boundary_ports(const Vec& trace, const Mat& rext) {
    if (rext.rows() != rext.cols() || trace.size() != rext.cols() || trace.size() % 2 != 0)
        throw std::invalid_argument("boundary_ports: size mismatch");
    const Vec fe = rext * trace;
    const auto h = fe.size() / 2;
    return {fe.head(h), fe.tail(h)};
}

// Vector field with one polynomial per component, in the global coordinate z.
using PolyField = std::vector<Poly>;

inline Vec eval_field(const PolyField& f, double z, int deriv = 0) {
    Vec v(static_cast<int>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) v(static_cast<int>(i)) = f[i].derivative(deriv)(z);
    return v;
}

inline Vec apply_operator(const OperatorSpec& spec, const PolyField& e, double z) {
    Vec out = Vec::Zero(spec.n);
    for (int i = 0; i <= spec.N; ++i) out += spec.P[i] * eval_field(e, z, i);
    return out;
}

// Trace ordered (e(b), e'(b), ..., e(a), e'(a), ...).
inline Vec trace_of(const PolyField& e, int n, int N, double a, double b) {
    Vec t(2 * n * N);
    for (int k = 0; k < N; ++k) {
        t.segment(k * n, n) = eval_field(e, b, k);
        t.segment(n * N + k * n, n) = eval_field(e, a, k);
    }
    return t;
}

inline double stokes_identity_residual(const OperatorSpec& spec, const PolyField& e1, const PolyField& e2,
                                       double a, double b) {
    spec.validate();
    if (static_cast<int>(e1.size()) != spec.n || static_cast<int>(e2.size()) != spec.n)
        throw std::invalid_argument("stokes_identity_residual: field dimension mismatch");
    const double lhs = integrate(
        [&](double z) {
            return apply_operator(spec, e1, z).dot(eval_field(e2, z)) +
                   eval_field(e1, z).dot(apply_operator(spec, e2, z));
        },
        a, b);
    const Mat p = build_P(spec);
    const int k = spec.n * spec.N;
    Mat form = Mat::Zero(2 * k, 2 * k);
    form.topLeftCorner(k, k) = p;
    form.bottomRightCorner(k, k) = -p;
    const double rhs = trace_of(e1, spec.n, spec.N, a, b).dot(form * trace_of(e2, spec.n, spec.N, a, b));
    return std::abs(lhs - rhs);
}

struct WBFactor {
    Mat2 S;
    Mat2 V;
    double reassembly_residual;
    bool contractive;  // V V^T <= I
};

inline std::pair<Mat2, Mat2> split_WB(const Mat& wb) {
    if (wb.rows() != 2 || wb.cols() != 4) throw std::invalid_argument("boundary matrix must be 2x4");
    return {wb.leftCols(2), wb.rightCols(2)};
}

inline WBFactor factor_WB(const Mat& wb) {
    auto [w1, w2] = split_WB(wb);
    WBFactor out;
    out.S = 0.5 * (w1 + w2);
    if (numerical_rank(out.S, 1e-12) < 2)
        throw numerical_failure("no S[I+V,I-V] factorization with invertible S");
    out.V = out.S.inverse() * (0.5 * (w1 - w2));
    Mat re(2, 4);
    re << out.S * (Mat2::Identity() + out.V), out.S * (Mat2::Identity() - out.V);
    out.reassembly_residual = (re - wb).norm();
    out.contractive = max_sym_eig(out.V * out.V.transpose()) <= 1.0 + 1e-10;
    return out;
}

enum class Classification { invalid_rank, indefinite, contraction, unitary_candidate, exponentially_stable_candidate };

inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::invalid_rank: return "invalid_rank";
        case Classification::indefinite: return "indefinite";
        case Classification::contraction: return "contraction";
        case Classification::unitary_candidate: return "unitary_candidate";
        case Classification::exponentially_stable_candidate: return "exponentially_stable_candidate";
    }
    return "unknown";
}

inline bool generates_contraction(Classification c) {
    return c == Classification::contraction || c == Classification::unitary_candidate ||
           c == Classification::exponentially_stable_candidate;
}

struct BoundaryConditionSpec {
    Mat WB;
    double r = 0.0;
    int rank = 0;
    bool factored = false;
    Mat2 S = Mat2::Zero();
    Mat2 V = Mat2::Zero();
    Mat2 sigma_form = Mat2::Zero();
    Classification classification = Classification::invalid_rank;
};

inline BoundaryConditionSpec classify_conditions(const Mat& wb, double r) {
    if (r < 0) throw std::invalid_argument("classify_conditions: r must be nonnegative");
    split_WB(wb);
    BoundaryConditionSpec s;
    s.WB = wb;
    s.r = r;
    s.rank = numerical_rank(wb);
    s.sigma_form = wb * sigma_matrix(2) * wb.transpose();
    try {
        const WBFactor f = factor_WB(wb);
        s.S = f.S;
        s.V = f.V;
        s.factored = true;
    } catch (const numerical_failure&) {
        s.factored = false;
    }
    if (s.rank != 2) {
        s.classification = Classification::invalid_rank;
        return s;
    }
    const double scale = std::max(1.0, s.sigma_form.norm());
    const double lo = min_sym_eig(s.sigma_form);
    if (lo < -1e-10 * scale) {
        s.classification = Classification::indefinite;
    } else if (r == 0.0 && s.sigma_form.norm() <= 1e-10) {
        s.classification = Classification::unitary_candidate;
    } else if (lo >= 1e-10) {
        s.classification = Classification::exponentially_stable_candidate;
    } else {
        s.classification = Classification::contraction;
    }
    return s;
}

// Columns span ker(WB) in port coordinates (f; e).
inline Mat kernel_basis(const BoundaryConditionSpec& spec) {
    if (!spec.factored) throw std::invalid_argument("kernel_basis: boundary matrix has no S,V factorization");
    Mat k(4, 2);
    k << Mat2::Identity() - spec.V, -Mat2::Identity() - spec.V;
    return k;
}

// Same kernel expressed in trace coordinates (e1(b), e2(b), e1(a), e2(a)).
inline Mat kernel_in_traces(const BoundaryConditionSpec& spec) {
    return wave_Rext().inverse() * kernel_basis(spec);
}

// Adjoint boundary relation [-(I+V^T), I-V^T] (f; e) = 0.
inline Mat adjoint_condition(const BoundaryConditionSpec& spec) {
    if (!spec.factored) throw std::invalid_argument("adjoint_condition: boundary matrix has no S,V factorization");
    Mat c(2, 4);
    const Mat2 id = Mat2::Identity();
    c << -(id + spec.V.transpose()), id - spec.V.transpose();
    return c;
}

}  // namespace porthamil::boundary
