#pragma once

#include "wedge_rbm/config.hpp"
#include "wedge_rbm/decomposition.hpp"
#include "wedge_rbm/errors.hpp"
#include "wedge_rbm/excursions.hpp"
#include "wedge_rbm/experiment.hpp"
#include "wedge_rbm/geometry.hpp"
#include "wedge_rbm/parallel.hpp"
#include "wedge_rbm/random.hpp"
#include "wedge_rbm/simulator.hpp"
#include "wedge_rbm/skorokhod.hpp"
#include "wedge_rbm/stats.hpp"
#include "wedge_rbm/time_change.hpp"
#include "wedge_rbm/variation.hpp"
