#pragma once

// single include for the whole library

#include "qcrystal/accumulator.hpp"
#include "qcrystal/checkpoint.hpp"
#include "qcrystal/free_measure.hpp"
#include "qcrystal/green_integral.hpp"
#include "qcrystal/grr.hpp"
#include "qcrystal/lattice.hpp"
#include "qcrystal/model.hpp"
#include "qcrystal/observables.hpp"
#include "qcrystal/oracle.hpp"
#include "qcrystal/potential.hpp"
#include "qcrystal/report.hpp"
#include "qcrystal/rng.hpp"
#include "qcrystal/run_config.hpp"
#include "qcrystal/sampler.hpp"
#include "qcrystal/scan.hpp"
