#pragma once

// Fixed-step hybrid closed-loop simulator: classical RK4 on the h-grid with
// the quantized output held constant within each step, state jumps applied
// exactly at (grid-snapped) switching times, the controller state machine
// driven in lockstep, and post-hoc invariant monitors over the recorded
// trajectory.

#include "qswitch/controller.hpp"
#include "qswitch/design.hpp"
#include "qswitch/plant.hpp"
#include "qswitch/quantizer.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace qswitch {

struct Scenario {
    DesignInputs inputs;        // plant lives inside
    SwitchingSignal signal;
    Vector x0;
    double horizon = 0.0;
    double h = 1e-3;
    std::uint64_t seed = 0;     // used only when the signal was generated

    void validate() const {
        inputs.validate();
        signal.validate();
        if (!(h > 0.0) || !(horizon > 0.0))
            throw std::invalid_argument("Scenario: h and horizon must be positive");
        if (x0.size() != inputs.plant.n())
            throw std::invalid_argument("Scenario: x0 dimension mismatch");
    }
};

struct TrajectoryRow {
    double t;
    Vector x;
    Vector xi;
    double mu;
    ModeId sigma;
    Stage stage;
    Vector u;
    Vector q;
    double V;
    bool in_r1;
    bool in_r2;
};

// mu-update trace: reasons are "zoom-out", "capture", "switch", "period".
struct MuEvent {
    double t;
    std::string reason;
    double mu_before;
    double mu_after;
};

struct TrajectoryRecord {
    std::vector<TrajectoryRow> rows;
    std::vector<MuEvent> events;
    double capture_time = -1.0;   // < 0 when capture never happened
    double mu_at_capture = 0.0;
    double period_length = 0.0;   // T snapped up to the grid
    bool diverged = false;
    double h = 0.0;
};

inline std::pair<bool, bool> region_membership(const Vector& z, double mu, ModeId p,
                                               const DesignCertificate& cert) {
    if (!(mu > 0.0)) throw std::invalid_argument("region_membership: mu must be positive");
    const double v = z.dot(cert.P.at(p) * z);
    return {v <= cert.r1_bound(mu), v <= cert.r2_bound(mu)};
}

inline TrajectoryRecord simulate(const Scenario& sc, const DesignCertificate& cert) {
    sc.validate();
    const double h = sc.h;
    const Eigen::Index n = sc.inputs.plant.n();
    const long nsteps = std::lround(sc.horizon / h);
    const long n_taubar = std::max<long>(1, std::lround(sc.inputs.tau_bar / h));
    const long samples_per_window = std::lround(sc.inputs.tau / h) + 1;
    // period snapped up: shorter-than-T periods would void the R1->R2 transit
    const long n_period = static_cast<long>(std::ceil(cert.T / h - 1e-9));

    std::map<long, ModeId> switch_at;  // grid-snapped switch schedule
    for (const auto& [t, m] : sc.signal.switches) {
        const long idx = std::lround(t / h);
        if (idx > 0 && idx <= nsteps) switch_at[idx] = m;
    }

    TrajectoryRecord rec;
    rec.h = h;
    rec.period_length = n_period * h;
    rec.rows.reserve(nsteps + 1);

    ControllerState st;
    st.mode = sc.signal.initial_mode;
    st.xi = Vector::Zero(n);
    Vector x = sc.x0;
    long anchor_idx = -1;

    for (long i = 0; i <= nsteps; ++i) {
        const double t = i * h;

        if (auto it = switch_at.find(i); it != switch_at.end()) {
            const ModeId p_new = it->second;
            const ModeId p_old = st.mode;
            const Matrix& r = sc.inputs.plant.jump(p_new, p_old);
            x = r * x;
            if (st.stage == Stage::ZoomIn) {
                const double before = st.mu;
                zoom_in_on_switch(st, cert, sc.inputs.plant, p_new, p_old);
                rec.events.push_back({t, "switch", before, st.mu});
            } else {
                st.xi = r * st.xi;  // zero during zoom-out, kept for generality
                st.mode = p_new;
                st.switchfree_start.reset();
                st.capture_buffer.clear();
            }
        }
        if (st.stage == Stage::ZoomIn && anchor_idx >= 0 && i > anchor_idx &&
            (i - anchor_idx) % n_period == 0) {
            const double before = st.mu;
            zoom_in_on_period_end(st, cert);
            rec.events.push_back({t, "period", before, st.mu});
        }
        if (st.stage == Stage::ZoomOut) {
            const long k = i / n_taubar;
            if (k != st.zoom_out_k || i == 0) {
                const double before = st.mu;
                st.zoom_out_k = k;
                st.mu = zoom_out_mu(cert, k);
                if (st.mu != before) rec.events.push_back({t, "zoom-out", before, st.mu});
            }
        }

        const ModeDynamics& md = sc.inputs.plant.mode(st.mode);
        Vector y = md.C * x;
        Vector q = zoomed_quantize(sc.inputs.quantizer, y, st.mu);

        if (st.stage == Stage::ZoomOut) {
            advance_zoom_out(st, sc.inputs.quantizer, q, st.mode, t, samples_per_window);
            if (st.stage == Stage::Capture) {
                const double before = st.mu;
                capture(st, cert, sc.inputs, t, h);
                anchor_idx = i;
                rec.capture_time = t;
                rec.mu_at_capture = st.mu;
                rec.events.push_back({t, "capture", before, st.mu});
                q = zoomed_quantize(sc.inputs.quantizer, y, st.mu);
            }
        }

        TrajectoryRow row;
        row.t = t;
        row.x = x;
        row.xi = st.xi;
        row.mu = st.mu;
        row.sigma = st.mode;
        row.stage = st.stage;
        row.q = q;
        Vector z(2 * n);
        z << x, x - st.xi;
        row.V = z.dot(cert.P.at(st.mode) * z);
        auto [r1, r2] = region_membership(z, st.mu, st.mode, cert);
        row.in_r1 = r1;
        row.in_r2 = r2;
        row.u = st.stage == Stage::ZoomIn ? Vector(md.K * st.xi)
                                          : Vector(Vector::Zero(sc.inputs.plant.m()));
        rec.rows.push_back(std::move(row));

        if (z.norm() > 1e12 || !z.allFinite()) {
            rec.diverged = true;
            break;
        }
        if (i == nsteps) break;

        if (st.stage == Stage::ZoomOut) {
            // open loop: u = 0, xi pinned at zero
            auto f = [&](const Vector& xv) -> Vector { return md.A * xv; };
            Vector k1 = f(x);
            Vector k2 = f(x + 0.5 * h * k1);
            Vector k3 = f(x + 0.5 * h * k2);
            Vector k4 = f(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            const Matrix bk = md.B * md.K;
            const Matrix aobs = md.A + md.L * md.C;
            const Vector lq = md.L * q;
            auto f = [&](const Vector& s) -> Vector {
                Vector out(2 * n);
                out.head(n) = md.A * s.head(n) + bk * s.tail(n);
                out.tail(n) = aobs * s.tail(n) + bk * s.tail(n) - lq;
                return out;
            };
            Vector s(2 * n);
            s << x, st.xi;
            Vector k1 = f(s);
            Vector k2 = f(s + 0.5 * h * k1);
            Vector k3 = f(s + 0.5 * h * k2);
            Vector k4 = f(s + h * k3);
            s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x = s.head(n);
            st.xi = s.tail(n);
        }
    }
    return rec;
}

// ---------------------------------------------------------------------------
// monitors

struct MonitorVerdict {
    std::string name;
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    long violations = 0;
    long checks = 0;
};

struct MonitorReport {
    MonitorVerdict r1_membership;     // (a)
    MonitorVerdict lyapunov_decrease; // (b)
    MonitorVerdict zoom_out_bound;    // (c)
    MonitorVerdict mu_envelope;       // (d)

    bool all_pass() const {
        return r1_membership.pass && lyapunov_decrease.pass && zoom_out_bound.pass &&
               mu_envelope.pass;
    }
};

inline MonitorReport monitor_invariants(const TrajectoryRecord& rec,
                                        const DesignCertificate& cert,
                                        const DesignInputs& in, const Vector& x0) {
    MonitorReport rep;
    rep.r1_membership.name = "R1 membership after capture";
    rep.lyapunov_decrease.name = "Lyapunov decrease rate outside R2";
    rep.zoom_out_bound.name = "zoom-out open-loop state bound";
    rep.mu_envelope.name = "mu envelope at period boundaries";
    const double grace = 1e-9;

    // (a) V <= R1 bound on every zoom-in row
    for (const auto& r : rec.rows) {
        if (r.stage != Stage::ZoomIn) continue;
        const double bound = cert.r1_bound(r.mu);
        const double margin = (bound - r.V) / bound;
        ++rep.r1_membership.checks;
        rep.r1_membership.worst_margin = std::min(rep.r1_membership.worst_margin, margin);
        if (r.V > bound * (1.0 + grace)) {
            rep.r1_membership.pass = false;
            ++rep.r1_membership.violations;
        }
    }

    // (b) on maximal runs with constant (mode, mu) where the row sits in
    // R1 \ R2, V must fall at the certified rate; the additive slack absorbs
    // the sample-and-hold discretization of the continuous inequality.
    const double slack = 1e-6 + 10.0 * rec.h;
    const double rate = cert.decrease_rate();
    std::size_t i = 0;
    while (i < rec.rows.size()) {
        const auto& r0 = rec.rows[i];
        if (r0.stage != Stage::ZoomIn || r0.in_r2 || !r0.in_r1) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < rec.rows.size()) {
            const auto& rn = rec.rows[j + 1];
            if (rn.stage != Stage::ZoomIn || rn.in_r2 || !rn.in_r1 || rn.mu != r0.mu ||
                rn.sigma != r0.sigma)
                break;
            ++j;
        }
        for (std::size_t k = i + 1; k <= j; ++k) {
            const auto& rk = rec.rows[k];
            const double need = r0.V - (rk.t - r0.t) * rate * r0.mu * r0.mu + slack;
            ++rep.lyapunov_decrease.checks;
            rep.lyapunov_decrease.worst_margin =
                std::min(rep.lyapunov_decrease.worst_margin, need - rk.V);
            if (rk.V > need) {
                rep.lyapunov_decrease.pass = false;
                ++rep.lyapunov_decrease.violations;
            }
        }
        i = j + 1;
    }

    // (c) |x(t)| <= Lambda^{N0 + t/tau_a} e^{Gamma t} |x(0)| while zooming out
    const double x0n = x0.norm();
    for (const auto& r : rec.rows) {
        if (r.stage != Stage::ZoomOut) continue;
        const double bound = std::pow(cert.lambda_jump, cert.n0 + r.t / cert.tau_a) *
                             std::exp(cert.gamma * r.t) * x0n;
        ++rep.zoom_out_bound.checks;
        const double margin = bound > 0.0 ? (bound - r.x.norm()) / bound : 0.0;
        rep.zoom_out_bound.worst_margin = std::min(rep.zoom_out_bound.worst_margin, margin);
        if (r.x.norm() > bound * (1.0 + grace)) {
            rep.zoom_out_bound.pass = false;
            ++rep.zoom_out_bound.violations;
        }
    }

    // (d) mu at the m-th period boundary stays under the ADT envelope
    long m = 0;
    for (const auto& ev : rec.events) {
        if (ev.reason != "period") continue;
        ++m;
        const double bound = std::sqrt(std::pow(cert.c, cert.n0 + cert.T / cert.tau_a)) *
                             std::pow(cert.omega * std::sqrt(std::pow(cert.c, cert.T / cert.tau_a)),
                                      static_cast<double>(m)) *
                             rec.mu_at_capture;
        ++rep.mu_envelope.checks;
        const double margin = (bound - ev.mu_after) / bound;
        rep.mu_envelope.worst_margin = std::min(rep.mu_envelope.worst_margin, margin);
        if (ev.mu_after > bound * (1.0 + grace)) {
            rep.mu_envelope.pass = false;
            ++rep.mu_envelope.violations;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// CSV export: header then one row per step, floats at 17 significant digits.

inline void write_csv(std::ostream& os, const TrajectoryRecord& rec, Eigen::Index n,
                      Eigen::Index m, Eigen::Index p) {
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
    for (Eigen::Index i = 1; i <= n; ++i) os << ",xi" << i;
    os << ",mu,sigma,stage";
    for (Eigen::Index i = 1; i <= m; ++i) os << ",u" << i;
    for (Eigen::Index i = 1; i <= p; ++i) os << ",q" << i;
    os << ",V,in_R1,in_R2\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& r : rec.rows) {
        put(r.t);
        for (Eigen::Index i = 0; i < n; ++i) { os << ','; put(r.x(i)); }
        for (Eigen::Index i = 0; i < n; ++i) { os << ','; put(r.xi(i)); }
        os << ','; put(r.mu);
        os << ',' << r.sigma << ',' << stage_name(r.stage);
        for (Eigen::Index i = 0; i < m; ++i) { os << ','; put(r.u(i)); }
        for (Eigen::Index i = 0; i < p; ++i) { os << ','; put(r.q(i)); }
        os << ','; put(r.V);
        os << ',' << (r.in_r1 ? 1 : 0) << ',' << (r.in_r2 ? 1 : 0) << '\n';
    }
}

inline void write_events_csv(std::ostream& os, const TrajectoryRecord& rec) {
    os << "t,reason,mu_before,mu_after\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& ev : rec.events) {
        put(ev.t);
        os << ',' << ev.reason << ',';
        put(ev.mu_before);
        os << ',';
        put(ev.mu_after);
        os << '\n';
    }
}

}  // namespace qswitch
