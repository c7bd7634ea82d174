// nmbench.hpp — Umbrella header.

#pragma once

#include "nmbench/appendix.hpp"
#include "nmbench/bath.hpp"
#include "nmbench/errors.hpp"
#include "nmbench/heom.hpp"
#include "nmbench/measures.hpp"
#include "nmbench/model.hpp"
#include "nmbench/problem.hpp"
#include "nmbench/propagate.hpp"
#include "nmbench/runner.hpp"
#include "nmbench/scenario.hpp"
#include "nmbench/tc2.hpp"
#include "nmbench/tl2.hpp"
#include "nmbench/trajectory.hpp"
#include "nmbench/units.hpp"
