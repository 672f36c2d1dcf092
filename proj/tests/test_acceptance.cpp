// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL verdict line. Tolerances are pinned in code.

#include <catch2/catch_amalgamated.hpp>

#include "qswitch/qswitch.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

using namespace qswitch;
using Catch::Approx;

namespace {

void verdict(const char* name, bool pass) {
    std::printf("[ACCEPTANCE] %-58s %s\n", name, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    REQUIRE(pass);
}

double z_norm(const TrajectoryRow& r) {
    Vector z(2 * r.x.size());
    z << r.x, r.x - r.xi;
    return z.norm();
}

struct SplitMix {
    std::uint64_t s;
    explicit SplitMix(std::uint64_t seed) : s(seed) {}
    double next() {  // uniform in [0, 1)
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return (z >> 11) * (1.0 / 9007199254740992.0);
    }
    double range(double lo, double hi) { return lo + (hi - lo) * next(); }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

TEST_CASE("criterion 1: certificate reproduction") {
    const auto t0 = Clock::now();
    Scenario sc = reference_scenario();
    ReferenceConstants ref;
    DesignCertificate cert = compute_certificate(sc.inputs);
    const double elapsed = seconds_since(t0);

    const bool ok = std::abs(cert.T - ref.T) / ref.T <= 0.02 &&
                    std::abs(cert.omega - ref.omega) / ref.omega <= 0.02 &&
                    std::abs(cert.c - ref.c) / ref.c <= 0.02 &&
                    std::abs(cert.tau_a_min - ref.tau_a_min) / ref.tau_a_min <= 0.02 &&
                    elapsed < 1.0;
    std::printf("  T=%.4f (ref %.4f)  Omega=%.4f (ref %.4f)  c=%.4f (ref %.4f)  "
                "tau_a_min=%.4f (ref %.4f)  [%.3f s]\n",
                cert.T, ref.T, cert.omega, ref.omega, cert.c, ref.c, cert.tau_a_min,
                ref.tau_a_min, elapsed);
    verdict("certificate reproduction within 2%, under 1 s", ok);
}

TEST_CASE("criterion 2: reference trajectory, qualitative reproduction") {
    const auto t0 = Clock::now();
    Scenario sc = reference_scenario();
    DesignCertificate cert = compute_certificate(sc.inputs);
    TrajectoryRecord rec = simulate(sc, cert);
    const double elapsed = seconds_since(t0);

    bool ok = !rec.diverged && rec.capture_time == 0.5 && elapsed < 10.0;

    std::set<double> increases;
    for (const auto& ev : rec.events) {
        if (ev.reason == "switch" && ev.mu_after > ev.mu_before) increases.insert(ev.t);
        if (ev.mu_after > ev.mu_before && ev.reason != "switch" && ev.reason != "capture" &&
            ev.reason != "zoom-out")
            ok = false;
        if (ev.mu_after < ev.mu_before && ev.reason != "period") ok = false;
    }
    ok = ok && increases == std::set<double>{3.5, 7.0, 20.0};

    const auto& cap = rec.rows.at(static_cast<std::size_t>(std::lround(0.5 / sc.h)));
    const double ratio = z_norm(rec.rows.back()) / z_norm(cap);
    ok = ok && ratio <= 0.01;
    std::printf("  capture at t=%g, |z(40)|/|z(0.5)| = %.3e, runtime %.2f s\n",
                rec.capture_time, ratio, elapsed);
    verdict("trajectory: capture at 0.5, mu pattern, 100x contraction", ok);
}

TEST_CASE("criterion 3: invariance suite under random compliant switching") {
    Scenario base = reference_scenario();
    DesignCertificate cert0 = compute_certificate(base.inputs);
    const double tau_a = 1.2 * cert0.tau_a_min;

    int pass_count = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Scenario sc = reference_scenario();
        sc.inputs.tau_a = tau_a;
        sc.inputs.n0 = seed % 2 == 0 ? 1.0 : 2.0;
        sc.horizon = 30.0;
        sc.signal = generate_adt_signal({1, 2}, sc.inputs.n0, tau_a, sc.horizon, seed);
        if (!verify_adt(sc.signal, sc.inputs.n0, tau_a, sc.horizon).pass) continue;

        SplitMix rng(1000 + seed);
        Vector dir(2);
        dir << rng.range(-1.0, 1.0), rng.range(-1.0, 1.0);
        sc.x0 = Vector(dir / dir.norm() * rng.range(0.5, 10.0));

        DesignCertificate cert = compute_certificate(sc.inputs);
        TrajectoryRecord rec = simulate(sc, cert);
        if (rec.diverged || rec.capture_time < 0.0) continue;
        MonitorReport rep = monitor_invariants(rec, cert, sc.inputs, sc.x0);
        if (rep.r1_membership.pass && rep.mu_envelope.pass) ++pass_count;
    }
    std::printf("  %d / 20 scenarios hold R1 membership and the mu envelope\n", pass_count);
    verdict("invariance suite: 20/20 at tau_a = 1.2 tau_a_min", pass_count == 20);
}

TEST_CASE("criterion 4: Lyapunov stability suite") {
    Scenario base = reference_scenario();
    DesignCertificate cert0 = compute_certificate(base.inputs);

    Scenario sc = reference_scenario();
    sc.inputs.tau_a = 10.0 * cert0.tau_a_min;  // keeps delta representable
    DesignCertificate cert = compute_certificate(sc.inputs);
    StabilityMargins sm = stability_margins(cert, sc.inputs, 1.0, 1.0);
    REQUIRE(sm.delta > 0.0);

    sc.signal.switches = {{5.0, 2}, {5.0 + 1.05 * sc.inputs.tau_a, 1}};
    REQUIRE(verify_adt(sc.signal, sc.inputs.n0, sc.inputs.tau_a, sc.horizon).pass);

    int pass_count = 0;
    SplitMix rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        Vector dir(2);
        do {
            dir << rng.range(-1.0, 1.0), rng.range(-1.0, 1.0);
        } while (dir.norm() < 1e-3);
        sc.x0 = Vector(dir / dir.norm() * (sm.delta * rng.range(0.05, 0.99)));
        TrajectoryRecord rec = simulate(sc, cert);
        double worst = 0.0;
        for (const auto& r : rec.rows) worst = std::max(worst, z_norm(r));
        if (!rec.diverged && worst < 1.0) ++pass_count;
    }
    std::printf("  delta = %.3e, %d / 20 trajectories stay inside eps = 1\n", sm.delta,
                pass_count);
    verdict("Lyapunov stability: 20/20 below eps from margins", pass_count == 20);
}

TEST_CASE("criterion 5: numerics oracles") {
    SplitMix rng(4242);
    auto rand_mat = [&](Eigen::Index r, Eigen::Index c, double s) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.range(-s, s);
        return m;
    };
    bool ok = true;

    // Lyapunov residual over 100 random Hurwitz instances
    for (int i = 0; i < 100 && ok; ++i) {
        const Eigen::Index k = 2 + i % 3;
        Matrix r = rand_mat(k, k, 1.0), sk = rand_mat(k, k, 1.0);
        Matrix f = -r.transpose() * r - 0.05 * Matrix::Identity(k, k) +
                   0.5 * (sk - sk.transpose());
        Matrix q0 = rand_mat(k, k, 1.0);
        Matrix q = q0.transpose() * q0 + 0.1 * Matrix::Identity(k, k);
        Matrix p = solve_lyapunov(f, q);
        ok = ok && (f.transpose() * p + p * f + q).norm() <= 1e-10 * q.norm();
    }
    verdict("Lyapunov residual <= 1e-10 ||Q|| on 100 Hurwitz instances", ok);

    // Gramian vs 10^4-panel Simpson on both reference modes
    Scenario sc = reference_scenario();
    ok = true;
    for (ModeId id : {1, 2}) {
        const ModeDynamics& md = sc.inputs.plant.mode(id);
        Matrix got = observability_gramian(md.A, md.C, sc.inputs.tau);
        const int panels = 10000;
        const double hh = sc.inputs.tau / panels;
        Matrix acc = Matrix::Zero(2, 2);
        auto f = [&](double t) {
            Matrix e = matrix_exponential(md.A, t);
            return Matrix(e.transpose() * md.C.transpose() * md.C * e);
        };
        for (int i = 0; i < panels; ++i) {
            const double t0 = i * hh;
            acc += hh / 6.0 * (f(t0) + 4.0 * f(t0 + 0.5 * hh) + f(t0 + hh));
        }
        ok = ok && (got - acc).norm() <= 1e-8 * acc.norm();
    }
    verdict("Gramian matches 1e4-panel Simpson to 1e-8 on both modes", ok);

    // pencil scaling factor vs congruence-eigen oracle, 100 SPD pairs
    ok = true;
    for (int i = 0; i < 100 && ok; ++i) {
        Matrix a = rand_mat(4, 4, 1.0), b = rand_mat(4, 4, 1.0);
        Matrix p1 = a.transpose() * a + 0.1 * Matrix::Identity(4, 4);
        Matrix p2 = b.transpose() * b + 0.1 * Matrix::Identity(4, 4);
        double got = min_scaling_factor(p1, p2, Matrix::Identity(4, 4));
        Eigen::SelfAdjointEigenSolver<Matrix> es(p1);
        Matrix isq = es.operatorInverseSqrt();
        double want = sym_eigenvalues(Matrix(isq * p2 * isq)).maxCoeff();
        ok = ok && std::abs(got - want) <= 1e-9 * want;
    }
    verdict("scaling factor matches congruence oracle to 1e-9, 100 pairs", ok);

    // matrix-exponential semigroup property
    ok = true;
    for (int i = 0; i < 100 && ok; ++i) {
        Matrix a = rand_mat(3, 3, 1.5);
        const double t = rng.range(0.0, 2.0), s = rng.range(0.0, 2.0);
        Matrix lhs = matrix_exponential(a, t + s);
        Matrix rhs = matrix_exponential(a, t) * matrix_exponential(a, s);
        ok = ok && (lhs - rhs).norm() <= 1e-9 * lhs.norm();
    }
    verdict("matrix-exponential semigroup property to 1e-9", ok);
}

TEST_CASE("criterion 6: quantizer property suite") {
    QuantizerConfig cfg = QuantizerConfig::make(10.0, 0.05, 2);
    SplitMix rng(1701);
    auto dir = [&]() {
        Vector v(2);
        do {
            v << rng.range(-1.0, 1.0), rng.range(-1.0, 1.0);
        } while (v.norm() < 1e-6);
        return Vector(v / v.norm());
    };
    long bad5 = 0, bad6 = 0, bad_dz = 0, bad_zoom = 0;
    for (int i = 0; i < 100000; ++i) {
        const double mu = rng.range(0.05, 20.0);
        {
            Vector y = dir() * rng.range(0.0, cfg.M * mu);
            if ((zoomed_quantize(cfg, y, mu) - y).norm() > cfg.Delta * mu * (1 + 1e-12)) ++bad5;
        }
        {
            Vector y = dir() * (cfg.M * mu * (1.0 + rng.range(1e-9, 2.0)));
            if (zoomed_quantize(cfg, y, mu).norm() <= (cfg.M - cfg.Delta) * mu) ++bad6;
        }
        {
            Vector y = dir() * rng.range(0.0, cfg.Delta0 * mu);
            if (zoomed_quantize(cfg, y, mu).norm() != 0.0) ++bad_dz;
        }
        {
            Vector y = dir() * rng.range(0.0, 3.0 * cfg.M * mu);
            Vector a = zoomed_quantize(cfg, y, mu);
            Vector b = mu * zoomed_quantize(cfg, Vector(y / mu), 1.0);
            if ((a - b).norm() != 0.0) ++bad_zoom;
        }
    }
    std::printf("  violations: range-error %ld, saturation %ld, dead-zone %ld, zoom %ld\n",
                bad5, bad6, bad_dz, bad_zoom);
    verdict("quantizer: 4 x 1e5 randomized properties, zero violations",
            bad5 + bad6 + bad_dz + bad_zoom == 0);
}

TEST_CASE("criterion 7: grid convergence") {
    Scenario sc = reference_scenario();
    DesignCertificate cert = compute_certificate(sc.inputs);
    TrajectoryRecord coarse = simulate(sc, cert);
    sc.h = 5e-4;
    TrajectoryRecord fine = simulate(sc, cert);
    const double zc = z_norm(coarse.rows.back());
    const double zf = z_norm(fine.rows.back());
    const double rel = std::abs(zc - zf) / zf;
    std::printf("  |z(40)| = %.6e at h=1e-3 vs %.6e at h=5e-4, rel diff %.4f\n", zc, zf, rel);
    verdict("grid convergence: |z(40)| differs by < 1% when h halves", rel < 0.01);
}
