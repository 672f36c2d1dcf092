#pragma once

#include "qswitch/controller.hpp"
#include "qswitch/design.hpp"
#include "qswitch/linalg.hpp"
#include "qswitch/plant.hpp"
#include "qswitch/quantizer.hpp"
#include "qswitch/reference_example.hpp"
#include "qswitch/scenario_io.hpp"
#include "qswitch/simulator.hpp"
