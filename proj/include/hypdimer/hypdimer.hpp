#pragma once

#include "hypdimer/error.hpp"
#include "hypdimer/hyperbolic.hpp"
#include "hypdimer/lattice.hpp"
#include "hypdimer/packing.hpp"
#include "hypdimer/temperley.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/potential.hpp"
#include "hypdimer/sampler.hpp"
#include "hypdimer/heights.hpp"
#include "hypdimer/experiments.hpp"
#include "hypdimer/config.hpp"
#include "hypdimer/io.hpp"
#include "hypdimer/verify.hpp"
#include "hypdimer/pipeline.hpp"
