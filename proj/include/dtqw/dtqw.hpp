#pragma once

// Umbrella header: the full coinless-DTQW toolkit.

#include "dtqw/bloch.hpp"
#include "dtqw/evolution.hpp"
#include "dtqw/io.hpp"
#include "dtqw/lattice.hpp"
#include "dtqw/parallel.hpp"
#include "dtqw/photonic.hpp"
#include "dtqw/run.hpp"
#include "dtqw/spectral.hpp"
#include "dtqw/version.hpp"
#include "dtqw/walk_operators.hpp"
