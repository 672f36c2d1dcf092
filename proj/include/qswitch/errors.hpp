#pragma once

#include <stdexcept>
#include <string>

namespace qswitch {

// Design infeasibility: names the violated inequality and the smallest
// saturation range M that would pass, so certificate computation doubles as
// a design-feasibility tool.
struct InfeasibleDesign : std::runtime_error {
    std::string inequality;
    double min_feasible_M;
    InfeasibleDesign(std::string ineq, double min_m)
        : std::runtime_error("design infeasible: violated " + ineq +
                             " (smallest feasible M ~ " + std::to_string(min_m) + ")"),
          inequality(std::move(ineq)),
          min_feasible_M(min_m) {}
};

}  // namespace qswitch
