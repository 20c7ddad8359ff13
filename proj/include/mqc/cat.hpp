// cat.hpp — two-coefficient model of a large cat state under measurement-only dynamics
//
// For c+|alpha> + c-|-alpha> with <-alpha|alpha> ~ 0 and |u| = 1 the noise term gives
//   dc+ = +c+ |alpha| e^{i(varphi - phi)} dW,   dc- = -c- |alpha| e^{i(varphi - phi)} dW
// where varphi = arg(alpha) sets the fringe orientation and phi the monitored quadrature.

#pragma once

#include "mqc/core.hpp"
#include "mqc/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace mqc {

struct CatCoefficients {
    cplx c_plus{1.0 / std::sqrt(2.0), 0.0};
    cplx c_minus{1.0 / std::sqrt(2.0), 0.0};
    cplx alpha{2.0, 0.0};

    double varphi() const { return std::arg(alpha); }
    double weight_plus() const { return std::norm(c_plus); }
    double weight_minus() const { return std::norm(c_minus); }

    // 4 |c+|^2 |c-|^2: 1 for a balanced cat, 0 once collapsed onto one component.
    double visibility() const { return 4.0 * weight_plus() * weight_minus(); }

    void normalize() {
        const double n = std::sqrt(std::norm(c_plus) + std::norm(c_minus));
        if (!(n > 0.0) || !std::isfinite(n)) throw SimulationError("CatCoefficients: cannot normalize");
        c_plus /= n;
        c_minus /= n;
    }
};

inline CatCoefficients cat_coefficient_step(const CatCoefficients& c, double phi, double dt, double dw) {
    (void)dt;  // the noise-only model has no drift
    const cplx k = std::abs(c.alpha) * std::exp(I * (c.varphi() - phi)) * dw;
    CatCoefficients out = c;
    out.c_plus = c.c_plus + c.c_plus * k;
    out.c_minus = c.c_minus - c.c_minus * k;
    out.normalize();
    return out;
}

}  // namespace mqc
