#pragma once

#include "analysis.hpp"
#include "closure.hpp"
#include "domain.hpp"
#include "integrator.hpp"
#include "oracles.hpp"
#include "power_series.hpp"
#include "systems.hpp"
