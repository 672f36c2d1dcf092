#pragma once

// Uniform quantizer with saturation range M, error bound Delta, and a
// Euclidean dead zone of radius Delta0, plus the zoom transformation
// q_mu(y) = mu q(y/mu). Per-axis step 2*Delta/sqrt(p) makes the per-axis
// half-step errors compose to a Euclidean error <= Delta; per-axis clamping
// keeps the codebook finite.

#include "qswitch/errors.hpp"
#include "qswitch/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace qswitch {

struct QuantizerConfig {
    double M = 0.0;       // saturation range
    double Delta = 0.0;   // error bound inside the range
    double Delta0 = 0.0;  // dead-zone radius, 0 < Delta0 <= Delta
    int dim = 1;          // output dimension p

    static QuantizerConfig make(double M, double Delta, int dim, double Delta0 = -1.0) {
        QuantizerConfig cfg;
        cfg.M = M;
        cfg.Delta = Delta;
        cfg.Delta0 = Delta0 < 0.0 ? Delta / 5.0 : Delta0;
        cfg.dim = dim;
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (!(M > 0.0) || !(Delta > 0.0)) throw std::invalid_argument("QuantizerConfig: M, Delta must be positive");
        if (!(M > 2.0 * Delta)) throw InfeasibleDesign("M > 2*Delta", 2.0 * Delta);
        if (!(Delta0 > 0.0)) throw std::invalid_argument("QuantizerConfig: dead zone Delta0 must be positive");
        if (Delta0 > Delta) throw std::invalid_argument("QuantizerConfig: require Delta0 <= Delta");
        if (dim < 1) throw std::invalid_argument("QuantizerConfig: dim must be >= 1");
    }

    double step() const { return 2.0 * Delta / std::sqrt(static_cast<double>(dim)); }
    // smallest grid multiple covering M + Delta per axis
    double clamp_radius() const { return std::ceil((M + Delta) / step()) * step(); }
};

// Round to the per-axis grid (ties toward +inf), dead zone at the origin,
// per-axis clamp for codebook finiteness.
inline Vector quantize(const QuantizerConfig& cfg, const Vector& y) {
    if (y.size() != cfg.dim) throw std::invalid_argument("quantize: dimension mismatch");
    if (!y.allFinite()) throw std::invalid_argument("quantize: non-finite input");
    if (y.norm() <= cfg.Delta0) return Vector::Zero(y.size());
    const double s = cfg.step();
    const double r = cfg.clamp_radius();
    Vector q(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double g = s * std::floor(y(i) / s + 0.5);
        q(i) = std::min(std::max(g, -r), r);
    }
    return q;
}

// q_mu(y) = mu q(y / mu)
inline Vector zoomed_quantize(const QuantizerConfig& cfg, const Vector& y, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("zoomed_quantize: mu must be positive");
    return mu * quantize(cfg, y / mu);
}

// "Not saturated" certificate used during zoom-out: |q| <= (M - Delta) mu.
inline bool saturation_test(const QuantizerConfig& cfg, const Vector& qy, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("saturation_test: mu must be positive");
    return qy.norm() <= (cfg.M - cfg.Delta) * mu;
}

}  // namespace qswitch
