#pragma once

#include "types.hpp"
#include "stability.hpp"
#include "spatial.hpp"
#include "integrate.hpp"
#include "coarsen.hpp"
#include "learner.hpp"
#include "analysis.hpp"
#include "serialize.hpp"
#include "experiment.hpp"
