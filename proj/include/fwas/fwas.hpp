#pragma once

#include "fwas/condition.hpp"
#include "fwas/error.hpp"
#include "fwas/experiments.hpp"
#include "fwas/faces.hpp"
#include "fwas/io.hpp"
#include "fwas/lp.hpp"
#include "fwas/min_norm.hpp"
#include "fwas/objective.hpp"
#include "fwas/parallel.hpp"
#include "fwas/polytope.hpp"
#include "fwas/rate.hpp"
#include "fwas/selftest.hpp"
#include "fwas/solver.hpp"
