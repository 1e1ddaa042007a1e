#pragma once

#include "hawkscan/bench.hpp"
#include "hawkscan/calibration.hpp"
#include "hawkscan/clusters.hpp"
#include "hawkscan/common.hpp"
#include "hawkscan/edges.hpp"
#include "hawkscan/fisher.hpp"
#include "hawkscan/fit.hpp"
#include "hawkscan/fixtures.hpp"
#include "hawkscan/glr.hpp"
#include "hawkscan/io.hpp"
#include "hawkscan/model.hpp"
#include "hawkscan/mvn_tail.hpp"
#include "hawkscan/normal.hpp"
#include "hawkscan/parallel.hpp"
#include "hawkscan/rng.hpp"
#include "hawkscan/scan.hpp"
#include "hawkscan/score.hpp"
#include "hawkscan/simulate.hpp"
