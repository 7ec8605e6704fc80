#pragma once

#include "orcs/bench.hpp"
#include "orcs/bvh.hpp"
#include "orcs/cell_list.hpp"
#include "orcs/config.hpp"
#include "orcs/distributions.hpp"
#include "orcs/domain.hpp"
#include "orcs/engine.hpp"
#include "orcs/error.hpp"
#include "orcs/lj.hpp"
#include "orcs/parallel.hpp"
#include "orcs/particles.hpp"
#include "orcs/policy.hpp"
#include "orcs/random.hpp"
#include "orcs/simulation.hpp"
#include "orcs/validate.hpp"
#include "orcs/vec3.hpp"
