// core.hpp — shared numeric types, error types and the physical parameter block

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mqc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Raised when a trajectory leaves the representable part of the Fock basis
// or produces non-finite amplitudes.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TruncationError : public SimulationError {
public:
    using SimulationError::SimulationError;
};

/// Point in (q, p) expectation space.
struct PhasePoint {
    double q{0.0};
    double p{0.0};
};

/// All dimensionless parameters of one run.
///
/// Units: Q and P are the dimensionless quadratures of the Hamiltonian, so the
/// classical coordinate x and velocity dx/dt of the Duffing equation coincide
/// with <Q> and <P> (the Heisenberg equations of the means reproduce it).
struct SimParams {
    double gamma{0.10};
    double g{0.3};
    double omega{1.0};
    double beta{0.3};
    double u_abs{1.0};
    double phi{pi};
    int basis_size{65};
    double dt{0.0};  // 0 selects the default step for the integrator in use
    std::uint64_t seed{1};

    double drive_period() const { return 2.0 * pi / omega; }

    void validate() const {
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be >= 0");
        if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("g must be >= 0");
        if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be > 0");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
        if (!(u_abs >= 0.0 && u_abs <= 1.0)) throw std::invalid_argument("u_abs must lie in [0, 1]");
        if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
        if (basis_size < 2) throw std::invalid_argument("basis_size must be >= 2");
        if (dt < 0.0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0 (or 0 for default)");
    }
};

/// Basis size that keeps the attractor inside the truncated space:
/// N = max(35, ceil(20 / beta)).
inline int auto_basis_size(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("auto_basis_size: beta must be > 0");
    return std::max(35, static_cast<int>(std::ceil(20.0 / beta - 1e-9)));
}

/// Default quantum/semiclassical step: 1e-4 of a drive period.
inline double default_quantum_dt(double omega) { return 1e-4 * 2.0 * pi / omega; }

/// Default classical step: 1e-3 of a drive period.
inline double default_classical_dt(double omega) { return 1e-3 * 2.0 * pi / omega; }

/// Number of integer steps per drive period closest to the requested dt.
inline long steps_per_period(double omega, double dt) {
    const double period = 2.0 * pi / omega;
    const long n = std::lround(period / dt);
    return n < 1 ? 1 : n;
}

}  // namespace mqc
