#pragma once

#include "canseal/analyzer.hpp"
#include "canseal/capture_io.hpp"
#include "canseal/errors.hpp"
#include "canseal/frame.hpp"
#include "canseal/node_sim.hpp"
#include "canseal/payload.hpp"
#include "canseal/report_io.hpp"
#include "canseal/speck64.hpp"
#include "canseal/stats.hpp"
