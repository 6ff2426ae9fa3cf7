// bellsim.hpp
// Umbrella header for the Bell experiment simulator.

#pragma once

#include "belllab/analysis.hpp"
#include "belllab/feasibility.hpp"
#include "belllab/protocol.hpp"
