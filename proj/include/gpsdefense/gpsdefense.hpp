#pragma once

#include "gpsdefense/attack.hpp"
#include "gpsdefense/core.hpp"
#include "gpsdefense/detectors.hpp"
#include "gpsdefense/harness.hpp"
#include "gpsdefense/iforest.hpp"
#include "gpsdefense/metrics.hpp"
#include "gpsdefense/pipeline.hpp"
#include "gpsdefense/rng.hpp"
#include "gpsdefense/rsu.hpp"
#include "gpsdefense/scenario.hpp"
#include "gpsdefense/sensor_sim.hpp"
#include "gpsdefense/state_estimation.hpp"
#include "gpsdefense/trajectory_gen.hpp"
