#pragma once

// Built-in two-mode reference example: an unstable saddle and a lightly
// driven rotation, output-feedback gains per mode, identity jump matrices,
// switching at t = 3.5, 7, 20. Published reference values for the derived
// constants: T = 0.6025, Omega = 0.9063, c = 1.9867, tau_a = 2.0744.

#include "qswitch/simulator.hpp"

namespace qswitch {

inline Scenario reference_scenario() {
    Scenario sc;
    ModeDynamics m1;
    m1.A = (Matrix(2, 2) << 1.0, -0.3, 0.4, -4.0).finished();
    m1.B = (Matrix(2, 1) << 1.0, 0.0).finished();
    m1.C = (Matrix(1, 2) << 1.0, 1.0).finished();
    m1.K = (Matrix(1, 2) << -3.0, -2.0).finished();
    m1.L = (Matrix(2, 1) << -4.0, 0.0).finished();
    ModeDynamics m2;
    m2.A = (Matrix(2, 2) << -0.1, 1.0, -1.0, 0.1).finished();
    m2.B = (Matrix(2, 1) << 0.0, 1.0).finished();
    m2.C = (Matrix(1, 2) << 0.0, -1.0).finished();
    m2.K = (Matrix(1, 2) << 0.0, -1.0).finished();
    m2.L = (Matrix(2, 1) << 0.0, 2.0).finished();
    sc.inputs.plant.modes[1] = m1;
    sc.inputs.plant.modes[2] = m2;
    sc.inputs.plant.jumps[{1, 2}] = Matrix::Identity(2, 2);
    sc.inputs.plant.jumps[{2, 1}] = Matrix::Identity(2, 2);

    Vector qdiag(4);
    qdiag << 6.0, 6.0, 2.0, 6.0;
    sc.inputs.Q[1] = qdiag.asDiagonal();
    sc.inputs.Q[2] = Matrix::Identity(4, 4);
    sc.inputs.kappa = 4.5;
    sc.inputs.tau = 0.5;
    sc.inputs.tau_bar = 1.0;
    sc.inputs.chi = 0.1;
    sc.inputs.n0 = 1.0;
    sc.inputs.tau_a = 2.5;  // the bundled signal verifies ADT for this value
    sc.inputs.quantizer = QuantizerConfig::make(10.0, 0.05, 1);

    sc.signal.initial_mode = 1;
    sc.signal.switches = {{3.5, 2}, {7.0, 1}, {20.0, 2}};
    sc.x0 = (Vector(2) << 5.0, -10.0).finished();
    sc.horizon = 40.0;
    sc.h = 1e-3;
    return sc;
}

struct ReferenceConstants {
    double T = 0.6025;
    double omega = 0.9063;
    double c = 1.9867;
    double tau_a_min = 2.0744;
};

}  // namespace qswitch
