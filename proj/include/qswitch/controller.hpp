#pragma once

// The quantized output-feedback controller as a deterministic state machine
// over three stages: zoom-out (u = 0, grow mu, hunt for a clean capture
// window), capture (Gramian reconstruction of the state from the buffered
// quantized outputs), zoom-in (Luenberger observer feedback with periodic
// mu shrink and a sqrt(c) bump at every switch).

#include "qswitch/design.hpp"
#include "qswitch/plant.hpp"
#include "qswitch/quantizer.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qswitch {

enum class Stage { ZoomOut, Capture, ZoomIn };

inline const char* stage_name(Stage s) {
    switch (s) {
        case Stage::ZoomOut: return "ZoomOut";
        case Stage::Capture: return "Capture";
        default: return "ZoomIn";
    }
}

struct ControllerState {
    Stage stage = Stage::ZoomOut;
    double mu = 1.0;
    Vector xi;                       // state estimate (zero during zoom-out)
    ModeId mode = 0;
    long zoom_out_k = 0;             // zoom-out period index
    std::optional<double> switchfree_start;
    std::vector<Vector> capture_buffer;  // quantized outputs over the window
    double period_anchor = 0.0;      // zoom-in period grid origin
};

// Zoom-out schedule: mu = 1 on the first period, then
// Lambda^{N0} (Lambda^{1/tau_a} e^{Gamma})^{(1+chi) k tau_bar}.
inline double zoom_out_mu(const DesignCertificate& cert, long k) {
    if (k < 0) throw std::invalid_argument("zoom_out_mu: k must be nonnegative");
    if (k == 0) return 1.0;
    const double growth = std::pow(cert.lambda_jump, 1.0 / cert.tau_a) * std::exp(cert.gamma);
    return std::pow(cert.lambda_jump, cert.n0) *
           std::pow(growth, (1.0 + cert.chi) * static_cast<double>(k) * cert.tau_bar);
}

// One zoom-out sample: maintain the switch-free unsaturated window. The
// sample is appended only if it passes the saturation certificate; a
// saturated sample or a mode change clears the window. When the buffer
// spans a full closed window [s0, s0 + tau] on the grid (samples_per_window
// entries), the stage flips to Capture.
inline void advance_zoom_out(ControllerState& st, const QuantizerConfig& cfg, const Vector& q_out,
                             ModeId sigma_now, double t, long samples_per_window) {
    if (st.stage != Stage::ZoomOut) throw std::logic_error("advance_zoom_out: wrong stage");
    if (sigma_now != st.mode) {
        st.mode = sigma_now;
        st.switchfree_start.reset();
        st.capture_buffer.clear();
    }
    if (!saturation_test(cfg, q_out, st.mu)) {
        st.switchfree_start.reset();
        st.capture_buffer.clear();
        return;
    }
    if (!st.switchfree_start) {
        st.switchfree_start = t;
        st.capture_buffer.clear();
    }
    st.capture_buffer.push_back(q_out);
    if (static_cast<long>(st.capture_buffer.size()) >= samples_per_window)
        st.stage = Stage::Capture;
}

// Gramian state reconstruction from the buffered window plus the zoom reset:
// xi = e^{A tau} W^{-1} int_0^tau e^{A^T s} C^T q(s) ds (trapezoidal on the
// grid), mu = sqrt(lmax/lmin) (Cmax/M) (|xi| + 2 ||W^{-1}|| tau Upsilon
// ||e^{A tau}|| Delta mu^-). Enters ZoomIn anchored at the capture instant.
inline void capture(ControllerState& st, const DesignCertificate& cert, const DesignInputs& in,
                    double t, double h) {
    if (st.stage != Stage::Capture) throw std::logic_error("capture: wrong stage");
    const long want = std::lround(in.tau / h) + 1;
    if (static_cast<long>(st.capture_buffer.size()) != want)
        throw std::logic_error("capture: incomplete buffer");
    const ModeDynamics& md = in.plant.mode(st.mode);
    const Matrix& w = cert.W.at(st.mode);
    const Matrix winv = w.inverse();
    const Matrix eat = matrix_exponential(md.A, in.tau);

    Vector integral = Vector::Zero(in.plant.n());
    const long nseg = want - 1;
    const Matrix estep = matrix_exponential(md.A.transpose(), h);
    Matrix eats = Matrix::Identity(in.plant.n(), in.plant.n());
    for (long i = 0; i < want; ++i) {
        const double wgt = (i == 0 || i == nseg) ? 0.5 : 1.0;
        integral += wgt * h * (eats * (md.C.transpose() * st.capture_buffer[i]));
        if (i + 1 < want) eats = eats * estep;
    }
    st.xi = eat * (winv * integral);

    const double mu_minus = st.mu;
    st.mu = std::sqrt(cert.lambda_p_max / cert.lambda_p_min) * (cert.c_max_norm / cert.M_) *
            (st.xi.norm() + 2.0 * spectral_norm(winv) * in.tau * cert.upsilon.at(st.mode) *
                                spectral_norm(eat) * cert.Delta_ * mu_minus);
    st.stage = Stage::ZoomIn;
    st.period_anchor = t;
    st.capture_buffer.clear();
    st.switchfree_start.reset();
}

// Switch during zoom-in: the estimate jumps with the plant and mu grows by
// sqrt(c_{new,old}) so the state stays inside the new mode's R1.
inline void zoom_in_on_switch(ControllerState& st, const DesignCertificate& cert,
                              const SwitchedPlant& plant, ModeId p_new, ModeId p_old) {
    if (st.stage != Stage::ZoomIn) throw std::logic_error("zoom_in_on_switch: wrong stage");
    if (p_new == p_old) throw std::invalid_argument("zoom_in_on_switch: p_new must differ");
    auto it = cert.c_pairs.find({p_new, p_old});
    if (it == cert.c_pairs.end())
        throw std::invalid_argument("zoom_in_on_switch: missing pair constant");
    st.xi = plant.jump(p_new, p_old) * st.xi;
    st.mu *= std::sqrt(it->second);
    st.mode = p_new;
}

// Period boundary: mu shrinks by Omega. Any sqrt(c) factors from switches
// inside the finished period are already in mu.
inline void zoom_in_on_period_end(ControllerState& st, const DesignCertificate& cert) {
    if (st.stage != Stage::ZoomIn) throw std::logic_error("zoom_in_on_period_end: wrong stage");
    st.mu *= cert.omega;
}

// Observer vector field and feedback input for the zoom-in stage:
// xi' = (A + LC) xi + B u - L q, u = K xi.
inline std::pair<Vector, Vector> observer_derivative(const ControllerState& st,
                                                     const SwitchedPlant& plant,
                                                     const Vector& q_out) {
    const ModeDynamics& md = plant.mode(st.mode);
    Vector u = md.K * st.xi;
    Vector xidot = (md.A + md.L * md.C) * st.xi + md.B * u - md.L * q_out;
    return {xidot, u};
}

}  // namespace qswitch
