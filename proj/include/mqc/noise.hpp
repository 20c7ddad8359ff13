// noise.hpp — reproducible complex Wiener increments for diffusive unravelings

#pragma once

#include "mqc/core.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqc {

// --------------------------- Seeding -----------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive mix of a master seed with any number of stream coordinates.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = splitmix64(master);
    for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_double(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(v));
    return bits;
}

/// Independent Gaussian stream owned by a single trajectory.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed = 1) : engine_(splitmix64(seed)) {}

    double gaussian() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// --------------------------- Unravelings -------------------------------------

/// u = |u| e^{-2 i phi}, |u| <= 1.
struct UnravelingSpec {
    double u_abs{1.0};
    double phi{0.0};

    cplx u() const { return u_abs * std::exp(-2.0 * I * phi); }

    void validate() const {
        if (!(u_abs >= 0.0 && u_abs <= 1.0)) throw std::invalid_argument("UnravelingSpec: |u| must lie in [0, 1]");
    }

    // Single real noise channel: dxi = e^{-i phi} dW1.
    bool single_channel() const { return u_abs == 1.0; }
};

inline UnravelingSpec unraveling_of(const SimParams& p) { return {p.u_abs, p.phi}; }

/// One step of noise: the complex increment and the real Wiener increments it was built from.
struct NoiseIncrement {
    cplx dxi{0.0, 0.0};
    double dw1{0.0};
    double dw2{0.0};
};

inline NoiseIncrement make_increment(const UnravelingSpec& spec, double dw1, double dw2) {
    const double a = std::sqrt((1.0 + spec.u_abs) / 2.0);
    const double b = std::sqrt((1.0 - spec.u_abs) / 2.0);
    const cplx dxi = std::exp(-I * spec.phi) * (a * dw1 + I * b * dw2);
    return {dxi, dw1, dw2};
}

inline NoiseIncrement sample_increment(const UnravelingSpec& spec, double dt, NoiseStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be > 0");
    const double s = std::sqrt(dt);
    const double dw1 = s * rng.gaussian();
    const double dw2 = s * rng.gaussian();
    return make_increment(spec, dw1, dw2);
}

// Wraps phi into [0, pi): u only fixes phi modulo pi.
inline double wrap_phase_mod_pi(double phi) {
    double r = std::fmod(phi, pi);
    if (r < 0.0) r += pi;
    if (r >= pi) r -= pi;
    return r;
}

/// u* = eta e^{2 i phi1} + (1 - eta) e^{2 i phi2}. Returned phi lies in [0, pi); it is 0 when u = 0.
inline UnravelingSpec unraveling_from_optics(double eta, double phi1, double phi2) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("unraveling_from_optics: eta must lie in [0, 1]");
    const cplx ustar = eta * std::exp(2.0 * I * phi1) + (1.0 - eta) * std::exp(2.0 * I * phi2);
    const cplx u = std::conj(ustar);
    UnravelingSpec spec;
    spec.u_abs = std::min(1.0, std::abs(u));
    spec.phi = spec.u_abs < 1e-15 ? 0.0 : wrap_phase_mod_pi(-std::arg(u) / 2.0);
    if (eta == 1.0) spec.u_abs = 1.0;
    return spec;
}

/// dxi* = sqrt(eta) e^{i phi1} dW1 + sqrt(1 - eta) e^{i phi2} dW2.
inline NoiseIncrement optics_noise_increment(double eta, double phi1, double phi2, double dt, NoiseStream& rng) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("optics_noise_increment: eta must lie in [0, 1]");
    if (!(dt > 0.0)) throw std::invalid_argument("optics_noise_increment: dt must be > 0");
    const double s = std::sqrt(dt);
    const double dw1 = s * rng.gaussian();
    const double dw2 = s * rng.gaussian();
    const cplx xistar = std::sqrt(eta) * std::exp(I * phi1) * dw1 + std::sqrt(1.0 - eta) * std::exp(I * phi2) * dw2;
    return {std::conj(xistar), dw1, dw2};
}

// --------------------------- Noise paths -------------------------------------

/// Stored sequence of increments on a uniform time grid.
struct NoisePath {
    double dt{0.0};
    std::uint64_t seed{0};
    UnravelingSpec spec;
    std::vector<NoiseIncrement> increments;

    std::size_t size() const { return increments.size(); }
    const NoiseIncrement& operator[](std::size_t k) const { return increments[k]; }

    static NoisePath generate(const UnravelingSpec& spec, double dt, std::size_t count, std::uint64_t seed) {
        spec.validate();
        NoisePath path;
        path.dt = dt;
        path.seed = seed;
        path.spec = spec;
        path.increments.reserve(count);
        NoiseStream rng(seed);
        for (std::size_t k = 0; k < count; ++k) path.increments.push_back(sample_increment(spec, dt, rng));
        return path;
    }

    static NoisePath zeros(const UnravelingSpec& spec, double dt, std::size_t count) {
        NoisePath path;
        path.dt = dt;
        path.spec = spec;
        path.increments.assign(count, NoiseIncrement{});
        return path;
    }

    /// Brownian-bridge refinement to dt/2: each coarse increment is split into two
    /// fine ones that sum to it exactly.
    NoisePath refined(std::uint64_t bridge_seed) const {
        NoisePath fine;
        fine.dt = dt / 2.0;
        fine.seed = bridge_seed;
        fine.spec = spec;
        fine.increments.reserve(2 * increments.size());
        NoiseStream rng(bridge_seed);
        const double s = std::sqrt(dt / 4.0);
        for (const auto& inc : increments) {
            const double a1 = 0.5 * inc.dw1 + s * rng.gaussian();
            const double a2 = 0.5 * inc.dw2 + s * rng.gaussian();
            fine.increments.push_back(make_increment(spec, a1, a2));
            fine.increments.push_back(make_increment(spec, inc.dw1 - a1, inc.dw2 - a2));
        }
        return fine;
    }

    // CSV audit dump: k, re_dxi, im_dxi
    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("NoisePath: cannot open " + path);
        out << "k,re_dxi,im_dxi\n" << std::setprecision(17);
        for (std::size_t k = 0; k < increments.size(); ++k)
            out << k << ',' << increments[k].dxi.real() << ',' << increments[k].dxi.imag() << '\n';
    }
};

}  // namespace mqc
