#pragma once

#include "tsemap/dynamics.hpp"
#include "tsemap/error.hpp"
#include "tsemap/harness.hpp"
#include "tsemap/metrics.hpp"
#include "tsemap/mixgen.hpp"
#include "tsemap/rng.hpp"
#include "tsemap/scheduler.hpp"
#include "tsemap/signal.hpp"
#include "tsemap/wav.hpp"
