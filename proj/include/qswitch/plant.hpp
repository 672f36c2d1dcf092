#pragma once

// Switched linear plant: per-mode dynamics with stabilizing gains, pairwise
// jump matrices, switching signals under an average dwell-time constraint,
// and the closed-loop matrices built from them.

#include "qswitch/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qswitch {

using ModeId = int;

// One mode of the plant together with its feedback and observer gains.
// Validation enforces the standing assumptions: A+BK and A+LC Hurwitz,
// (C,A) observable.
struct ModeDynamics {
    Matrix A;  // n x n
    Matrix B;  // n x m
    Matrix C;  // p x n
    Matrix K;  // m x n
    Matrix L;  // n x p

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return B.cols(); }
    Eigen::Index p() const { return C.rows(); }

    void validate() const {
        const Eigen::Index nn = n();
        if (A.cols() != nn || B.rows() != nn || C.cols() != nn ||
            K.rows() != m() || K.cols() != nn || L.rows() != nn || L.cols() != p())
            throw std::invalid_argument("ModeDynamics: inconsistent dimensions");
        if (!is_hurwitz(A + B * K))
            throw std::invalid_argument("ModeDynamics: A+BK is not Hurwitz");
        if (!is_hurwitz(A + L * C))
            throw std::invalid_argument("ModeDynamics: A+LC is not Hurwitz");
        if (!observable())
            throw std::invalid_argument("ModeDynamics: (C,A) is not observable");
    }

    // Numerical rank of the stacked observability matrix, singular-value
    // threshold 1e-9 relative to the largest singular value.
    bool observable() const {
        const Eigen::Index nn = n(), pp = p();
        Matrix obs(nn * pp, nn);
        Matrix cak = C;
        for (Eigen::Index i = 0; i < nn; ++i) {
            obs.middleRows(i * pp, pp) = cak;
            cak = cak * A;
        }
        Vector sv = obs.jacobiSvd().singularValues();
        return sv(sv.size() - 1) > 1e-9 * sv(0);
    }
};

struct SwitchedPlant {
    std::map<ModeId, ModeDynamics> modes;
    std::map<std::pair<ModeId, ModeId>, Matrix> jumps;  // key (p2, p1), p2 != p1

    Eigen::Index n() const { return modes.begin()->second.n(); }
    Eigen::Index m() const { return modes.begin()->second.m(); }
    Eigen::Index p() const { return modes.begin()->second.p(); }

    const ModeDynamics& mode(ModeId id) const {
        auto it = modes.find(id);
        if (it == modes.end())
            throw std::invalid_argument("SwitchedPlant: unknown mode id " + std::to_string(id));
        return it->second;
    }

    const Matrix& jump(ModeId to, ModeId from) const {
        auto it = jumps.find({to, from});
        if (it == jumps.end())
            throw std::invalid_argument("SwitchedPlant: missing jump matrix R_{" +
                                        std::to_string(to) + "," + std::to_string(from) + "}");
        return it->second;
    }

    void validate() const {
        if (modes.empty()) throw std::invalid_argument("SwitchedPlant: no modes");
        for (const auto& [id, md] : modes) {
            md.validate();
            if (md.n() != n() || md.m() != m() || md.p() != p())
                throw std::invalid_argument("SwitchedPlant: modes disagree on dimensions");
        }
        for (const auto& [key, r] : jumps) {
            if (key.first == key.second)
                throw std::invalid_argument("SwitchedPlant: jump matrix for identical modes");
            if (r.rows() != n() || r.cols() != n())
                throw std::invalid_argument("SwitchedPlant: jump matrix dimension mismatch");
        }
    }
};

// Right-continuous piecewise-constant mode schedule.
struct SwitchingSignal {
    ModeId initial_mode = 0;
    std::vector<std::pair<double, ModeId>> switches;  // strictly increasing times > 0

    void validate() const {
        ModeId prev = initial_mode;
        double last = 0.0;
        for (const auto& [t, m] : switches) {
            if (!(t > last)) throw std::invalid_argument("SwitchingSignal: times must be strictly increasing and > 0");
            if (m == prev) throw std::invalid_argument("SwitchingSignal: consecutive modes must differ");
            last = t;
            prev = m;
        }
    }

    ModeId mode_at(double t) const {
        ModeId m = initial_mode;
        for (const auto& [ts, ms] : switches) {
            if (ts <= t) m = ms;
            else break;
        }
        return m;
    }
};

// F_p in the coordinates z = (x, x - xi): upper block triangular with
// diagonal blocks A+BK and A+LC.
inline Matrix closed_loop_matrix(const SwitchedPlant& plant, ModeId p) {
    const ModeDynamics& md = plant.mode(p);
    const Eigen::Index n = md.n();
    Matrix f = Matrix::Zero(2 * n, 2 * n);
    f.topLeftCorner(n, n) = md.A + md.B * md.K;
    f.topRightCorner(n, n) = -md.B * md.K;
    f.bottomRightCorner(n, n) = md.A + md.L * md.C;
    return f;
}

// J_{p2,p1} = blkdiag(R, R): both x and x - xi jump by R.
inline Matrix closed_loop_jump(const SwitchedPlant& plant, ModeId p2, ModeId p1) {
    if (p2 == p1) throw std::invalid_argument("closed_loop_jump: p2 must differ from p1");
    const Matrix& r = plant.jump(p2, p1);
    const Eigen::Index n = r.rows();
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topLeftCorner(n, n) = r;
    j.bottomRightCorner(n, n) = r;
    return j;
}

// N_sigma(t, s): switches in the half-open interval (s, t].
inline int count_switches(const SwitchingSignal& sig, double s, double t) {
    if (!(t > s) || s < 0.0) throw std::invalid_argument("count_switches: need t > s >= 0");
    int n = 0;
    for (const auto& [ts, m] : sig.switches)
        if (ts > s && ts <= t) ++n;
    return n;
}

struct AdtReport {
    bool pass = true;
    double witness_s = 0.0;  // first violating pair, valid when !pass
    double witness_t = 0.0;
};

// Check N_sigma(t,s) <= N0 + (t-s)/tau_a for all windows up to the horizon.
// Checking pairs of switch times suffices: the count is piecewise constant
// and the bound is tightest with s just before a switch, t at a later one.
inline AdtReport verify_adt(const SwitchingSignal& sig, double n0, double tau_a, double horizon) {
    if (!(n0 >= 1.0)) throw std::invalid_argument("verify_adt: N0 must be >= 1");
    if (!(tau_a > 0.0)) throw std::invalid_argument("verify_adt: tau_a must be positive");
    std::vector<double> ts;
    for (const auto& [t, m] : sig.switches)
        if (t <= horizon) ts.push_back(t);
    // For s just below t_j, the window (s, t_k] holds k-j+1 switches, so the
    // requirement is t_k - t_j >= (k-j+1-N0) tau_a.
    for (std::size_t j = 0; j < ts.size(); ++j) {
        for (std::size_t k = j; k < ts.size(); ++k) {
            const double need = (static_cast<double>(k - j + 1) - n0) * tau_a;
            if (ts[k] - ts[j] < need - 1e-12) {
                return {false, ts[j], ts[k]};
            }
        }
    }
    return {};
}

// Random ADT-compliant signal on a millisecond grid, deterministic per seed.
// Constraints are enforced constructively with one grid cell of margin so the
// result also verifies after snapping to any h that divides 1e-3.
inline SwitchingSignal generate_adt_signal(const std::vector<ModeId>& mode_set, double n0,
                                           double tau_a, double horizon, std::uint64_t seed) {
    if (mode_set.size() < 2) throw std::invalid_argument("generate_adt_signal: need at least 2 modes");
    if (!(tau_a > 0.0)) throw std::invalid_argument("generate_adt_signal: tau_a must be positive");
    constexpr double grid = 1e-3;
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() {
        return (rng() >> 11) * (1.0 / 9007199254740992.0);  // [0, 1)
    };
    SwitchingSignal sig;
    sig.initial_mode = mode_set[static_cast<std::size_t>(uniform() * mode_set.size()) % mode_set.size()];

    const long hor_idx = std::lround(horizon / grid);
    std::vector<long> idxs;
    long t_idx = 0;
    while (true) {
        const double gap = tau_a * (0.05 - std::log(1.0 - uniform()));
        long cand = t_idx + std::max<long>(1, std::lround(gap / grid));
        const long k = static_cast<long>(idxs.size());
        for (long j = 0; j < k; ++j) {
            const double need_t = (static_cast<double>(k - j + 1) - n0) * tau_a;
            const long need = idxs[j] + static_cast<long>(std::ceil(need_t / grid - 1e-9)) + 1;
            if (cand < need) cand = need;
        }
        if (cand >= hor_idx) break;
        idxs.push_back(cand);
        t_idx = cand;
    }
    ModeId cur = sig.initial_mode;
    for (long idx : idxs) {
        ModeId next = cur;
        while (next == cur) {
            next = mode_set[static_cast<std::size_t>(uniform() * mode_set.size()) % mode_set.size()];
        }
        sig.switches.emplace_back(static_cast<double>(idx) * grid, next);
        cur = next;
    }
    sig.validate();
    return sig;
}

}  // namespace qswitch
