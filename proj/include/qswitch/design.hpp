#pragma once

// Controller design certificate: Lyapunov matrices per mode, the derived
// constants (Theta, Omega, c, T, minimum average dwell time, capture-window
// count N, Gramians, output-response bounds) and the Lyapunov-stability
// margins (mu_bar, m_bar, eta, delta).

#include "qswitch/errors.hpp"
#include "qswitch/linalg.hpp"
#include "qswitch/plant.hpp"
#include "qswitch/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace qswitch {

struct DesignInputs {
    SwitchedPlant plant;
    std::map<ModeId, Matrix> Q;  // SPD 2n x 2n per mode
    double kappa = 0.0;
    QuantizerConfig quantizer;
    double tau = 0.0;      // capture window length
    double tau_bar = 0.0;  // zoom-out period
    double chi = 0.0;      // zoom-out margin
    double n0 = 1.0;       // ADT chatter bound
    double tau_a = 0.0;    // assumed average dwell time

    void validate() const {
        plant.validate();
        quantizer.validate();
        if (quantizer.dim != plant.p()) throw std::invalid_argument("DesignInputs: quantizer dim != plant output dim");
        if (!(kappa > 0.0)) throw std::invalid_argument("DesignInputs: kappa must be positive");
        if (!(chi > 0.0)) throw std::invalid_argument("DesignInputs: chi must be positive");
        if (!(tau > 0.0) || !(tau_bar > 0.0)) throw std::invalid_argument("DesignInputs: tau, tau_bar must be positive");
        if (!(n0 >= 1.0)) throw std::invalid_argument("DesignInputs: N0 must be >= 1");
        if (!(tau < tau_a)) throw std::invalid_argument("DesignInputs: require tau < tau_a");
        for (const auto& [id, md] : plant.modes) {
            auto it = Q.find(id);
            if (it == Q.end()) throw std::invalid_argument("DesignInputs: missing Q for mode " + std::to_string(id));
            if (it->second.rows() != 2 * plant.n() || !is_positive_definite(it->second))
                throw std::invalid_argument("DesignInputs: Q for mode " + std::to_string(id) + " is not SPD 2n x 2n");
        }
    }
};

struct DesignCertificate {
    std::map<ModeId, Matrix> P;     // Lyapunov matrices (2n x 2n, SPD)
    double lambda_p_max = 0.0;      // max_p lambda_max(P_p)
    double lambda_p_min = 0.0;      // min_p lambda_min(P_p)
    double lambda_q_min = 0.0;      // min_p lambda_min(Q_p)
    double c_max_norm = 0.0;        // max_p ||C_p||
    double theta = 0.0;
    double gamma = 0.0;             // max_p ||A_p||
    double lambda_jump = 1.0;       // max(1, max ||R||)
    double omega = 0.0;             // in (0, 1)
    std::map<std::pair<ModeId, ModeId>, double> c_pairs;
    double c = 1.0;                 // max(1, max c_pairs)
    double T = 0.0;                 // zoom-in period
    double tau_a_min = 0.0;
    int capture_window_count = 1;   // N
    std::map<ModeId, Matrix> W;     // observability Gramians at tau
    std::map<ModeId, double> upsilon;

    // carried over from the inputs for the runtime pieces
    double n0 = 1.0;
    double tau_a = 0.0;
    double tau = 0.0;
    double tau_bar = 0.0;
    double chi = 0.0;
    double kappa = 0.0;

    double M_ = 0.0;      // quantizer range, cached for the level sets
    double Delta_ = 0.0;  // quantizer error bound

    // level sets of V_p(z) = z^T P_p z that trap the zoom-in trajectory
    double r1_bound(double mu) const {
        return lambda_p_min * M_ * M_ * mu * mu / (c_max_norm * c_max_norm);
    }
    double r2_bound(double mu) const {
        const double g = theta * Delta_ * (1.0 + kappa);
        return lambda_p_max * g * g * mu * mu;
    }
    // Lyapunov decrease rate per unit time outside R2 (divided by mu^2)
    double decrease_rate() const {
        const double td = theta * Delta_;
        return lambda_q_min * kappa * (1.0 + kappa) * td * td;
    }
};

// Theta = 2 max_p ||P_p Lhat_p|| / lambda_Q with Lhat_p = [0; L_p].
inline double compute_theta(const std::map<ModeId, Matrix>& P, const SwitchedPlant& plant,
                            double lambda_q_min) {
    double w = 0.0;
    const Eigen::Index n = plant.n();
    for (const auto& [id, pmat] : P) {
        const ModeDynamics& md = plant.mode(id);
        Matrix lhat = Matrix::Zero(2 * n, md.p());
        lhat.bottomRows(n) = md.L;
        w = std::max(w, spectral_norm(pmat * lhat));
    }
    return 2.0 * w / lambda_q_min;
}

inline DesignCertificate compute_certificate(const DesignInputs& in) {
    in.validate();
    DesignCertificate cert;
    const Eigen::Index n = in.plant.n();

    // Lyapunov certificates use the F P + P F^T = -Q orientation (the
    // convention behind the reference constants; see README design notes).
    for (const auto& [id, md] : in.plant.modes) {
        Matrix f = closed_loop_matrix(in.plant, id);
        cert.P[id] = solve_lyapunov(f.transpose(), in.Q.at(id));
    }

    cert.lambda_p_max = 0.0;
    cert.lambda_p_min = std::numeric_limits<double>::infinity();
    cert.lambda_q_min = std::numeric_limits<double>::infinity();
    for (const auto& [id, pmat] : cert.P) {
        Vector ev = sym_eigenvalues(pmat);
        cert.lambda_p_max = std::max(cert.lambda_p_max, ev(ev.size() - 1));
        cert.lambda_p_min = std::min(cert.lambda_p_min, ev(0));
        cert.lambda_q_min = std::min(cert.lambda_q_min, sym_eigenvalues(in.Q.at(id))(0));
    }
    cert.c_max_norm = 0.0;
    cert.gamma = 0.0;
    for (const auto& [id, md] : in.plant.modes) {
        cert.c_max_norm = std::max(cert.c_max_norm, spectral_norm(md.C));
        cert.gamma = std::max(cert.gamma, spectral_norm(md.A));
    }
    cert.lambda_jump = 1.0;
    for (const auto& [key, r] : in.plant.jumps)
        cert.lambda_jump = std::max(cert.lambda_jump, spectral_norm(r));

    cert.theta = compute_theta(cert.P, in.plant, cert.lambda_q_min);

    const double M = in.quantizer.M;
    const double delta = in.quantizer.Delta;
    const double ratio = std::sqrt(cert.lambda_p_max / cert.lambda_p_min);

    // feasibility of the saturation range
    if (!(M > 2.0 * delta))
        throw InfeasibleDesign("M > 2*Delta", 2.0 * delta);
    if (!(M > ratio * cert.theta * delta * cert.c_max_norm))
        throw InfeasibleDesign("M > sqrt(lmax/lmin)*Theta*Delta*Cmax",
                               ratio * cert.theta * delta * cert.c_max_norm);
    cert.omega = ratio * cert.theta * delta * (1.0 + in.kappa) * cert.c_max_norm / M;
    if (!(cert.omega < 1.0))
        throw InfeasibleDesign("sqrt(lmin)*M > sqrt(lmax)*Theta*Delta*(1+kappa)*Cmax (Omega < 1)",
                               ratio * cert.theta * delta * (1.0 + in.kappa) * cert.c_max_norm);

    const double g = cert.theta * delta * (1.0 + in.kappa) * cert.c_max_norm;
    const double t_inf = (cert.lambda_p_min * M * M - cert.lambda_p_max * g * g) /
                         (cert.lambda_q_min * in.kappa * (1.0 + in.kappa) *
                          std::pow(cert.theta * delta * cert.c_max_norm, 2));
    cert.T = (1.0 + 1e-6) * t_inf;

    for (const auto& [key, r] : in.plant.jumps) {
        Matrix j = closed_loop_jump(in.plant, key.first, key.second);
        cert.c_pairs[key] = min_scaling_factor(cert.P.at(key.second), cert.P.at(key.first), j);
    }
    cert.c = 1.0;
    for (const auto& [key, v] : cert.c_pairs) cert.c = std::max(cert.c, v);

    cert.tau_a_min = std::log(cert.c) / (2.0 * std::log(1.0 / cert.omega)) * cert.T;

    // smallest integer N with N > tau_a/(tau_a - tau) (N0 - tau/tau_a)
    const double nx = in.tau_a / (in.tau_a - in.tau) * (in.n0 - in.tau / in.tau_a);
    cert.capture_window_count = std::max(1, static_cast<int>(std::floor(nx)) + 1);

    for (const auto& [id, md] : in.plant.modes) {
        cert.W[id] = observability_gramian(md.A, md.C, in.tau);
        cert.upsilon[id] = output_response_bound(md.A, md.C, in.tau);
    }

    cert.n0 = in.n0;
    cert.tau_a = in.tau_a;
    cert.tau = in.tau;
    cert.tau_bar = in.tau_bar;
    cert.chi = in.chi;
    cert.kappa = in.kappa;
    cert.M_ = M;
    cert.Delta_ = delta;
    return cert;
}

struct StabilityMargins {
    double eps = 0.0;
    double alpha = 0.0;
    double mu_bar = 0.0;
    int m_bar = 1;
    double eta = 0.0;
    double delta = 0.0;
};

// Lyapunov-stability arithmetic: capture-zoom bound mu_bar, period count
// m_bar, zoom floor eta, and the safe initial radius delta (0.99 x the
// tightest of the three upper bounds).
inline StabilityMargins stability_margins(const DesignCertificate& cert, const DesignInputs& in,
                                          double eps, double alpha) {
    if (!(eps > 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("stability_margins: eps, alpha must be positive");
    StabilityMargins sm;
    sm.eps = eps;
    sm.alpha = alpha;

    const double rho = cert.omega * std::sqrt(std::pow(cert.c, cert.T / cert.tau_a));
    if (!(rho < 1.0))
        throw std::runtime_error("stability_margins: Omega*sqrt(c^(T/tau_a)) >= 1, margins undefined");

    const double growth = std::pow(cert.lambda_jump, 1.0 / cert.tau_a) * std::exp(cert.gamma);
    const double ntau = cert.capture_window_count * cert.tau;
    double wmax = 0.0;
    for (const auto& [id, md] : in.plant.modes) {
        const Matrix winv = cert.W.at(id).inverse();
        const Matrix eat = matrix_exponential(md.A, cert.tau);
        wmax = std::max(wmax, spectral_norm(winv) * cert.upsilon.at(id) * spectral_norm(eat));
    }
    sm.mu_bar = std::max(alpha,
                         2.0 * std::sqrt(cert.lambda_p_max / cert.lambda_p_min) * cert.Delta_ *
                             cert.tau * cert.c_max_norm *
                             std::pow(cert.lambda_jump, cert.n0) *
                             std::pow(growth, (1.0 + cert.chi) * ntau) / cert.M_ * wmax);

    const double mx = std::log(sm.mu_bar * cert.M_ *
                               std::sqrt(std::pow(cert.c, cert.n0 + cert.T / cert.tau_a)) /
                               (eps * cert.c_max_norm)) /
                      std::log(1.0 / rho);
    sm.m_bar = std::max(1, static_cast<int>(std::floor(mx)) + 1);

    double c_und = 1.0;
    for (const auto& [key, v] : cert.c_pairs) c_und = std::min(c_und, v);
    sm.eta = alpha * std::pow(cert.omega, sm.m_bar) *
             std::sqrt(std::pow(c_und, cert.n0 + sm.m_bar * cert.T / cert.tau_a));

    const double lam_n0 = std::pow(cert.lambda_jump, cert.n0);
    const double horizon_pow = std::pow(growth, ntau + sm.m_bar * cert.T);
    const double delta0 = in.quantizer.Delta0;
    const double b_deadzone = delta0 / (cert.c_max_norm * lam_n0 * std::pow(growth, ntau));
    const double b_eta = sm.eta * delta0 / (cert.c_max_norm * lam_n0 * horizon_pow);
    const double b_eps = eps / (2.0 * lam_n0 * horizon_pow);
    sm.delta = 0.99 * std::min({b_deadzone, b_eta, b_eps});
    return sm;
}

}  // namespace qswitch
