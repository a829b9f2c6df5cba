#pragma once

// Event-triggered formation control: graph machinery, distance-based control
// law, event generation, plants, simulation engine, scenarios and I/O.

#include "etfc/graph.hpp"
#include "etfc/formation.hpp"
#include "etfc/controller.hpp"
#include "etfc/trigger.hpp"
#include "etfc/dynamics.hpp"
#include "etfc/metrics.hpp"
#include "etfc/engine.hpp"
#include "etfc/scenarios.hpp"
#include "etfc/io.hpp"
