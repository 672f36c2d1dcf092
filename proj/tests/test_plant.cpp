#include <catch2/catch_amalgamated.hpp>

#include "qswitch/plant.hpp"
#include "qswitch/reference_example.hpp"

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

using namespace qswitch;
using Catch::Approx;

namespace {

std::mt19937_64 rng(777);
double unif(double lo, double hi) {
    return lo + (hi - lo) * ((rng() >> 11) * (1.0 / 9007199254740992.0));
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = unif(-scale, scale);
    return m;
}

// shift the whole spectrum left of -0.5
Matrix random_hurwitz(Eigen::Index k) {
    Matrix s = random_matrix(k, k, 1.0);
    return Matrix(s - (spectral_norm(s) + 0.5) * Matrix::Identity(k, k));
}

std::vector<std::complex<double>> sorted_spectrum(const Matrix& m) {
    Eigen::EigenSolver<Matrix> es(m, false);
    std::vector<std::complex<double>> v(es.eigenvalues().data(),
                                        es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

}  // namespace

TEST_CASE("closed-loop matrix of the reference example") {
    Scenario sc = reference_scenario();
    Matrix f1 = closed_loop_matrix(sc.inputs.plant, 1);
    Matrix want(2, 2);
    want << -2.0, -2.3, 0.4, -4.0;
    REQUIRE((f1.topLeftCorner(2, 2) - want).norm() == 0.0);
    REQUIRE(f1.bottomLeftCorner(2, 2).norm() == 0.0);
    REQUIRE(is_hurwitz(f1));
    REQUIRE_THROWS_AS(closed_loop_matrix(sc.inputs.plant, 9), std::invalid_argument);
}

TEST_CASE("degenerate all-zero mode is rejected") {
    ModeDynamics md;
    md.A = Matrix::Zero(1, 1);
    md.B = Matrix::Zero(1, 1);
    md.C = Matrix::Zero(1, 1);
    md.K = Matrix::Zero(1, 1);
    md.L = Matrix::Zero(1, 1);
    REQUIRE_THROWS_AS(md.validate(), std::invalid_argument);
}

TEST_CASE("closed-loop spectrum is the union of the block spectra") {
    for (int trial = 0; trial < 20; ++trial) {
        // B = C = I lets us hit any Hurwitz pair exactly
        const Eigen::Index n = 2;
        ModeDynamics md;
        md.A = random_matrix(n, n, 1.0);
        md.B = Matrix::Identity(n, n);
        md.C = Matrix::Identity(n, n);
        Matrix h1 = random_hurwitz(n), h2 = random_hurwitz(n);
        md.K = h1 - md.A;
        md.L = h2 - md.A;
        md.validate();
        SwitchedPlant plant;
        plant.modes[1] = md;
        Matrix f = closed_loop_matrix(plant, 1);

        auto got = sorted_spectrum(f);
        auto s1 = sorted_spectrum(h1);
        auto s2 = sorted_spectrum(h2);
        s1.insert(s1.end(), s2.begin(), s2.end());
        std::sort(s1.begin(), s1.end(), [](auto a, auto b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        REQUIRE(got.size() == s1.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            REQUIRE(std::abs(got[i] - s1[i]) < 1e-8);
        REQUIRE(max_real_eigenvalue(f) < -1e-9);
    }
}

TEST_CASE("closed-loop jump structure") {
    Scenario sc = reference_scenario();
    REQUIRE((closed_loop_jump(sc.inputs.plant, 2, 1) - Matrix::Identity(4, 4)).norm() == 0.0);

    // scalar plant, R = 2 -> J = diag(2, 2)
    SwitchedPlant p1;
    ModeDynamics md;
    md.A = (Matrix(1, 1) << -1.0).finished();
    md.B = (Matrix(1, 1) << 1.0).finished();
    md.C = (Matrix(1, 1) << 1.0).finished();
    md.K = (Matrix(1, 1) << 0.0).finished();
    md.L = (Matrix(1, 1) << 0.0).finished();
    p1.modes[1] = md;
    p1.modes[2] = md;
    p1.jumps[{2, 1}] = (Matrix(1, 1) << 2.0).finished();
    Matrix j = closed_loop_jump(p1, 2, 1);
    REQUIRE((j - (Matrix(2, 2) << 2, 0, 0, 2).finished()).norm() == 0.0);
    REQUIRE_THROWS_AS(closed_loop_jump(p1, 1, 2), std::invalid_argument);  // missing pair
    REQUIRE_THROWS_AS(closed_loop_jump(p1, 1, 1), std::invalid_argument);

    // random R acts blockwise: J z = (R x, R (x - xi))
    SwitchedPlant p2 = reference_scenario().inputs.plant;
    Matrix r = random_matrix(2, 2, 2.0);
    p2.jumps[{2, 1}] = r;
    Matrix j2 = closed_loop_jump(p2, 2, 1);
    Vector x = Vector(random_matrix(2, 1, 3.0));
    Vector e = Vector(random_matrix(2, 1, 3.0));
    Vector z(4);
    z << x, e;
    Vector jz = j2 * z;
    REQUIRE((jz.head(2) - r * x).norm() < 1e-14);
    REQUIRE((jz.tail(2) - r * e).norm() < 1e-14);
}

TEST_CASE("switch counting over half-open intervals") {
    Scenario sc = reference_scenario();
    const SwitchingSignal& sig = sc.signal;
    REQUIRE(count_switches(sig, 0.0, 10.0) == 2);  // 3.5 and 7
    REQUIRE(count_switches(sig, 3.5, 10.0) == 1);  // s exactly at a switch: excluded
    REQUIRE(count_switches(sig, 0.0, 3.5) == 1);   // t exactly at a switch: included
    REQUIRE(count_switches(sig, 21.0, 40.0) == 0);
    REQUIRE_THROWS_AS(count_switches(sig, 5.0, 5.0), std::invalid_argument);

    SwitchingSignal empty;
    empty.initial_mode = 1;
    REQUIRE(count_switches(empty, 0.0, 100.0) == 0);

    // additivity: N(t,s) = N(t,r) + N(r,s)
    for (int trial = 0; trial < 50; ++trial) {
        double s = unif(0.0, 20.0);
        double r = s + unif(0.1, 10.0);
        double t = r + unif(0.1, 10.0);
        REQUIRE(count_switches(sig, s, t) ==
                count_switches(sig, r, t) + count_switches(sig, s, r));
    }
}

TEST_CASE("average dwell-time verification") {
    Scenario sc = reference_scenario();
    REQUIRE(verify_adt(sc.signal, 1.0, 2.0744, 40.0).pass);

    SwitchingSignal tight;
    tight.initial_mode = 1;
    tight.switches = {{1.0, 2}, {1.1, 1}};
    AdtReport rep = verify_adt(tight, 1.0, 10.0, 40.0);
    REQUIRE_FALSE(rep.pass);
    REQUIRE(rep.witness_s == Approx(1.0));
    REQUIRE(rep.witness_t == Approx(1.1));

    SwitchingSignal none;
    none.initial_mode = 2;
    REQUIRE(verify_adt(none, 1.0, 0.5, 40.0).pass);
    REQUIRE_THROWS_AS(verify_adt(none, 0.5, 1.0, 40.0), std::invalid_argument);
}

TEST_CASE("generated signals are deterministic and ADT-compliant") {
    std::vector<ModeId> modes{1, 2, 3};
    SwitchingSignal a = generate_adt_signal(modes, 1.0, 2.0, 60.0, 42);
    SwitchingSignal b = generate_adt_signal(modes, 1.0, 2.0, 60.0, 42);
    REQUIRE(a.initial_mode == b.initial_mode);
    REQUIRE(a.switches == b.switches);
    REQUIRE_FALSE(a.switches.empty());

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double n0 = 1.0 + static_cast<double>(seed % 3);
        const double tau_a = 0.5 + 0.05 * static_cast<double>(seed % 7);
        SwitchingSignal sig = generate_adt_signal(modes, n0, tau_a, 30.0, seed);
        REQUIRE(verify_adt(sig, n0, tau_a, 30.0).pass);
    }

    REQUIRE_THROWS_AS(generate_adt_signal({1}, 1.0, 1.0, 10.0, 0), std::invalid_argument);
}
