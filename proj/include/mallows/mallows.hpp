#pragma once

#include "mallows/error.hpp"
#include "mallows/rng.hpp"
#include "mallows/permset.hpp"
#include "mallows/partition.hpp"
#include "mallows/mistakes.hpp"
#include "mallows/sampler.hpp"
#include "mallows/posterior.hpp"
#include "mallows/simulate.hpp"
#include "mallows/io.hpp"
