// lindblad.hpp — deterministic master-equation integrator (validation reference for trajectory averages)

#pragma once

#include "mqc/core.hpp"
#include "mqc/fock.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

namespace mqc {

inline constexpr int kMaxDensityBasis = 80;

inline Matrix projector(const StateVector& s) { return s.amps * s.amps.adjoint(); }

/// -i[H(t), rho] + L rho L^dag - {L^dag L, rho}/2
inline Matrix lindblad_rhs(const Matrix& rho, const OperatorSet& ops, double t) {
    if (rho.rows() != ops.n || rho.cols() != ops.n) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const double c = std::cos(ops.omega * t);
    Matrix h_rho = ops.h_static_band.left(rho);
    Matrix rho_h = ops.h_static_band.right(rho);
    if (c != 0.0) {
        h_rho += c * ops.h_drive_band.left(rho);
        rho_h += c * ops.h_drive_band.right(rho);
    }
    Matrix out = -I * (h_rho - rho_h);
    out += ops.l_band.adjoint().right(ops.l_band.left(rho));
    const Eigen::VectorXcd d = ops.ltl_diag.cast<cplx>();
    out -= 0.5 * (d.asDiagonal() * rho + rho * d.asDiagonal());
    return out;
}

inline double trace_distance(const Matrix& a, const Matrix& b) {
    const Matrix diff = 0.5 * ((a - b) + (a - b).adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double min_eigenvalue(const Matrix& rho) {
    const Matrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double hermiticity_error(const Matrix& rho) { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

/// Classical RK4 integration of the master equation from t0 to t0 + duration.
inline Matrix evolve_density(const OperatorSet& ops, const Matrix& rho0, double duration, double dt, double t0 = 0.0) {
    if (ops.n > kMaxDensityBasis)
        throw std::invalid_argument("evolve_density: basis_size above " + std::to_string(kMaxDensityBasis) + " (dense reference only)");
    if (rho0.rows() != ops.n || rho0.cols() != ops.n) throw std::invalid_argument("evolve_density: dimension mismatch");
    if (duration < 0.0) throw std::invalid_argument("evolve_density: negative duration");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_density: dt must be > 0");
    Matrix rho = rho0;
    if (duration == 0.0) return rho;
    const long steps = std::max(1L, std::lround(std::ceil(duration / dt - 1e-9)));
    const double h = duration / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * h;
        const Matrix k1 = lindblad_rhs(rho, ops, t);
        const Matrix k2 = lindblad_rhs(rho + 0.5 * h * k1, ops, t + 0.5 * h);
        const Matrix k3 = lindblad_rhs(rho + 0.5 * h * k2, ops, t + 0.5 * h);
        const Matrix k4 = lindblad_rhs(rho + h * k3, ops, t + h);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

inline Matrix evolve_density(const SimParams& params, const Matrix& rho0, double duration) {
    if (params.basis_size > kMaxDensityBasis)
        throw std::invalid_argument("evolve_density: basis_size above " + std::to_string(kMaxDensityBasis) + " (dense reference only)");
    const OperatorSet ops = build_operators(params);
    const double dt = params.dt > 0.0 ? params.dt : default_quantum_dt(params.omega);
    return evolve_density(ops, rho0, duration, dt);
}

// Headered complex matrix dump: "# N <n>" then rows of "re im" pairs.
inline void write_density_matrix(const std::string& path, const Matrix& rho) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_density_matrix: cannot open " + path);
    out << "# N " << rho.rows() << "\n" << std::setprecision(17);
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            if (c) out << ' ';
            out << rho(r, c).real() << ' ' << rho(r, c).imag();
        }
        out << '\n';
    }
}

}  // namespace mqc
