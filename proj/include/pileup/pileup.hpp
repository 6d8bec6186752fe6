#pragma once

#include "pileup/asymptotics.hpp"
#include "pileup/blayer.hpp"
#include "pileup/energetics.hpp"
#include "pileup/equilibrium.hpp"
#include "pileup/error.hpp"
#include "pileup/harness.hpp"
#include "pileup/numerics.hpp"
#include "pileup/potential.hpp"
