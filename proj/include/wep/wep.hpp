// Everything in one include.
#pragma once

#include "wep/clt.hpp"
#include "wep/commands.hpp"
#include "wep/config.hpp"
#include "wep/empirical.hpp"
#include "wep/format.hpp"
#include "wep/metrics_limit.hpp"
#include "wep/numeric.hpp"
#include "wep/parallel.hpp"
#include "wep/process_models.hpp"
#include "wep/random.hpp"
#include "wep/report.hpp"
#include "wep/stats.hpp"
#include "wep/transforms.hpp"
#include "wep/verifiers.hpp"
#include "wep/weights.hpp"
