// fock.hpp — truncated Fock-space operators, states and expectation values

#pragma once

#include "mqc/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace mqc {

// --------------------------- Banded operator storage -------------------------

// Square matrix stored by its nonzero diagonals. Every operator in this model
// (Q, P, Q^4, ...) has a small bandwidth, so applying it costs O(N * bands).
class BandedMatrix {
public:
    struct Diagonal {
        int offset{0};              // column - row
        std::vector<cplx> values;   // values[k] = B(row_begin + k, row_begin + k + offset)
        int row_begin() const { return offset < 0 ? -offset : 0; }
    };

    BandedMatrix() = default;

    static BandedMatrix from_dense(const Matrix& m, double tol = 0.0) {
        if (m.rows() != m.cols()) throw std::invalid_argument("BandedMatrix: matrix must be square");
        BandedMatrix b;
        b.n_ = static_cast<int>(m.rows());
        for (int off = -(b.n_ - 1); off <= b.n_ - 1; ++off) {
            Diagonal d;
            d.offset = off;
            const int r0 = d.row_begin();
            const int len = b.n_ - std::abs(off);
            d.values.resize(static_cast<std::size_t>(len));
            bool any = false;
            for (int k = 0; k < len; ++k) {
                const cplx v = m(r0 + k, r0 + k + off);
                d.values[static_cast<std::size_t>(k)] = v;
                if (std::abs(v) > tol) any = true;
            }
            if (any) b.diags_.push_back(std::move(d));
        }
        return b;
    }

    int size() const { return n_; }
    const std::vector<Diagonal>& diagonals() const { return diags_; }

    // y += scale * B x
    void apply_add(const cplx* x, cplx* y, cplx scale = 1.0) const {
        for (const auto& d : diags_) {
            const int r0 = d.row_begin();
            const int len = static_cast<int>(d.values.size());
            const cplx* v = d.values.data();
            const cplx* xs = x + r0 + d.offset;
            cplx* ys = y + r0;
            if (scale == cplx(1.0))
                for (int k = 0; k < len; ++k) ys[k] += v[k] * xs[k];
            else
                for (int k = 0; k < len; ++k) ys[k] += scale * (v[k] * xs[k]);
        }
    }

    Vector operator*(const Vector& x) const {
        check_dim(x.size());
        Vector y = Vector::Zero(n_);
        apply_add(x.data(), y.data());
        return y;
    }

    // B * M
    Matrix left(const Matrix& m) const {
        check_dim(m.rows());
        Matrix out = Matrix::Zero(m.rows(), m.cols());
        for (Eigen::Index c = 0; c < m.cols(); ++c) apply_add(m.col(c).data(), out.col(c).data());
        return out;
    }

    // M * B
    Matrix right(const Matrix& m) const {
        check_dim(m.cols());
        Matrix out = Matrix::Zero(m.rows(), m.cols());
        for (const auto& d : diags_) {
            const int r0 = d.row_begin();
            for (std::size_t k = 0; k < d.values.size(); ++k) {
                const int row = r0 + static_cast<int>(k);
                const int col = row + d.offset;
                out.col(col) += d.values[k] * m.col(row);
            }
        }
        return out;
    }

    BandedMatrix adjoint() const {
        BandedMatrix b;
        b.n_ = n_;
        for (auto it = diags_.rbegin(); it != diags_.rend(); ++it) {
            Diagonal d;
            d.offset = -it->offset;
            d.values.resize(it->values.size());
            for (std::size_t k = 0; k < it->values.size(); ++k) d.values[k] = std::conj(it->values[k]);
            b.diags_.push_back(std::move(d));
        }
        return b;
    }

    Matrix to_dense() const {
        Matrix m = Matrix::Zero(n_, n_);
        for (const auto& d : diags_) {
            const int r0 = d.row_begin();
            for (std::size_t k = 0; k < d.values.size(); ++k) {
                const int row = r0 + static_cast<int>(k);
                m(row, row + d.offset) = d.values[k];
            }
        }
        return m;
    }

private:
    void check_dim(Eigen::Index n) const {
        if (n != n_) throw std::invalid_argument("BandedMatrix: dimension mismatch");
    }

    int n_{0};
    std::vector<Diagonal> diags_;
};

// --------------------------- States ------------------------------------------

/// Pure state in the truncated harmonic-oscillator eigenbasis.
struct StateVector {
    Vector amps;

    StateVector() = default;
    explicit StateVector(Vector a) : amps(std::move(a)) {}

    int size() const { return static_cast<int>(amps.size()); }
    double norm_squared() const { return amps.squaredNorm(); }

    void normalize() {
        const double n = amps.norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw SimulationError("StateVector: cannot normalize zero or non-finite state");
        amps /= n;
    }

    // Population of the top `levels` basis states.
    double tail_population(int levels = 5) const {
        const int n = size();
        double s = 0.0;
        for (int k = std::max(0, n - levels); k < n; ++k) s += std::norm(amps(k));
        return s;
    }

    bool all_finite() const { return amps.allFinite(); }
};

inline StateVector fock_state(int n, int basis_size) {
    if (basis_size < 1 || n < 0 || n >= basis_size) throw std::invalid_argument("fock_state: level outside basis");
    Vector v = Vector::Zero(basis_size);
    v(n) = 1.0;
    return StateVector(std::move(v));
}

// Tail-safety heuristic for coherent amplitudes: |alpha|^2 + 5|alpha| < N.
inline bool coherent_fits(cplx alpha, int basis_size) {
    const double a = std::abs(alpha);
    return a * a + 5.0 * a < static_cast<double>(basis_size);
}

// Untruncated-formula amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < N.
inline Vector coherent_amplitudes(cplx alpha, int basis_size) {
    Vector c(basis_size);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < basis_size; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return c;
}

inline StateVector coherent_state(cplx alpha, int basis_size) {
    if (basis_size < 2) throw std::invalid_argument("coherent_state: basis_size must be >= 2");
    if (!coherent_fits(alpha, basis_size))
        throw std::invalid_argument("coherent_state: |alpha| too large for the basis (|alpha|^2 + 5|alpha| >= N)");
    StateVector s(coherent_amplitudes(alpha, basis_size));
    s.normalize();
    return s;
}

// Analytic normalization 1/sqrt(2(1 + s e^{-2|alpha|^2})) of |alpha> + s|-alpha>.
inline double cat_norm_factor(cplx alpha, int rel_sign) {
    return 1.0 / std::sqrt(2.0 * (1.0 + rel_sign * std::exp(-2.0 * std::norm(alpha))));
}

inline StateVector cat_state(cplx alpha, int rel_sign, int basis_size) {
    if (rel_sign != 1 && rel_sign != -1) throw std::invalid_argument("cat_state: rel_sign must be +1 or -1");
    if (basis_size < 2) throw std::invalid_argument("cat_state: basis_size must be >= 2");
    if (!coherent_fits(alpha, basis_size))
        throw std::invalid_argument("cat_state: |alpha| too large for the basis (|alpha|^2 + 5|alpha| >= N)");
    Vector v = coherent_amplitudes(alpha, basis_size) + static_cast<double>(rel_sign) * coherent_amplitudes(-alpha, basis_size);
    if (v.norm() < 1e-150) throw std::invalid_argument("cat_state: odd cat of alpha = 0 is the null vector");
    StateVector s(std::move(v));
    s.normalize();
    return s;
}

// --------------------------- Operators ---------------------------------------

inline Matrix annihilation(int n) {
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

/// Precomputed operators of the driven dissipative Duffing model.
///
/// Dense matrices are the reference representation; the banded copies are
/// what the integrators apply.
struct OperatorSet {
    int n{0};
    double gamma{0.0};
    double omega{1.0};

    Matrix q_op;
    Matrix p_op;
    Matrix l_op;
    Matrix h_static;
    Matrix h_drive;  // coefficient of cos(omega t)

    BandedMatrix l_band;
    BandedMatrix h_static_band;
    BandedMatrix h_drive_band;
    Eigen::VectorXd ltl_diag;  // L^dag L = 2 gamma a^dag a is diagonal

    // Copy with the Hamiltonian switched off (measurement-only dynamics).
    OperatorSet without_hamiltonian() const {
        OperatorSet o = *this;
        o.h_static.setZero();
        o.h_drive.setZero();
        o.h_static_band = BandedMatrix::from_dense(o.h_static);
        o.h_drive_band = BandedMatrix::from_dense(o.h_drive);
        return o;
    }
};

inline OperatorSet build_operators(const SimParams& params) {
    if (params.basis_size < 2) throw std::invalid_argument("build_operators: basis_size must be >= 2");
    if (!(params.beta > 0.0)) throw std::invalid_argument("build_operators: beta must be > 0");
    params.validate();

    const int n = params.basis_size;
    const Matrix a = annihilation(n);
    const Matrix ad = a.adjoint();
    const double r2 = std::sqrt(2.0);

    OperatorSet ops;
    ops.n = n;
    ops.gamma = params.gamma;
    ops.omega = params.omega;
    ops.q_op = (a + ad) / r2;
    ops.p_op = -I * (a - ad) / r2;
    ops.l_op = std::sqrt(params.gamma) * (ops.q_op + I * ops.p_op);

    // Powers of truncated Q and P are wrong in the top corner (e.g. <N-1|Q^2|N-1> loses the
    // a a^dag part), which lowers the energy of the top levels and lets the quartic dynamics
    // leak into them. Building in a basis 4 levels larger and projecting gives exact elements.
    const int m = n + 4;
    const Matrix am = annihilation(m);
    const Matrix qm = (am + am.adjoint()) / r2;
    const Matrix pm = -I * (am - am.adjoint()) / r2;
    const Matrix q2 = qm * qm;
    const Matrix p2 = pm * pm;
    const double b2 = params.beta * params.beta;
    const Matrix h_big = 0.5 * p2 + (b2 / 4.0) * (q2 * q2) - 0.5 * q2 + (params.gamma / 2.0) * (qm * pm + pm * qm);
    ops.h_static = h_big.topLeftCorner(n, n);
    ops.h_drive = -(params.g / params.beta) * ops.q_op;

    // Round-off can leave tiny non-Hermitian residue in the products.
    ops.h_static = 0.5 * (ops.h_static + ops.h_static.adjoint()).eval();

    ops.l_band = BandedMatrix::from_dense(ops.l_op, 1e-300);
    ops.h_static_band = BandedMatrix::from_dense(ops.h_static, 1e-14);
    ops.h_drive_band = BandedMatrix::from_dense(ops.h_drive, 1e-300);
    ops.ltl_diag = (ops.l_op.adjoint() * ops.l_op).diagonal().real();
    return ops;
}

inline Matrix hamiltonian_at(const OperatorSet& ops, double t) {
    return ops.h_static + ops.h_drive * std::cos(ops.omega * t);
}

inline cplx expectation(const StateVector& state, const Matrix& op) {
    if (op.rows() != state.size() || op.cols() != state.size())
        throw std::invalid_argument("expectation: dimension mismatch");
    return state.amps.dot(op * state.amps);  // dot conjugates the first argument
}

// <a> without forming a matrix.
inline cplx mean_annihilation(const Vector& c) {
    cplx s = 0.0;
    for (Eigen::Index k = 1; k < c.size(); ++k) s += std::sqrt(static_cast<double>(k)) * std::conj(c(k - 1)) * c(k);
    return s;
}

// (<Q>, <P>) for a normalized state: a = (Q + iP)/sqrt(2).
inline PhasePoint quadrature_means(const StateVector& s) {
    const cplx a = mean_annihilation(s.amps);
    return {std::sqrt(2.0) * a.real(), std::sqrt(2.0) * a.imag()};
}

/// Applies the displacement operator exp(alpha a^dag - alpha* a), alpha = (dq + i dp)/sqrt(2),
/// which shifts <Q> by dq and <P> by dp (up to truncation at the top of the basis).
inline StateVector displace(const StateVector& state, double dq, double dp) {
    const int n = state.size();
    const cplx alpha = cplx(dq, dp) / std::sqrt(2.0);
    if (std::abs(alpha) == 0.0) return state;
    // Substep so that each Taylor series is well conditioned.
    const double bound = 2.0 * std::abs(alpha) * std::sqrt(static_cast<double>(n));
    const int substeps = std::max(1, static_cast<int>(std::ceil(bound / 0.5)));
    const cplx al = alpha / static_cast<double>(substeps);

    auto apply_gen = [&](const Vector& x) {
        Vector y = Vector::Zero(n);
        for (int k = 0; k < n; ++k) {
            if (k + 1 < n) y(k) -= std::conj(al) * std::sqrt(static_cast<double>(k + 1)) * x(k + 1);
            if (k >= 1) y(k) += al * std::sqrt(static_cast<double>(k)) * x(k - 1);
        }
        return y;
    };

    Vector psi = state.amps;
    for (int s = 0; s < substeps; ++s) {
        Vector term = psi;
        Vector acc = psi;
        for (int k = 1; k < 60; ++k) {
            term = apply_gen(term) / static_cast<double>(k);
            acc += term;
            if (term.norm() < 1e-18 * acc.norm()) break;
        }
        psi = std::move(acc);
    }
    StateVector out(std::move(psi));
    out.normalize();
    return out;
}

}  // namespace mqc
