#pragma once

// Umbrella header: the whole toolkit in one include.

#include "covspec/airy.hpp"
#include "covspec/chopping.hpp"
#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/fitting.hpp"
#include "covspec/io.hpp"
#include "covspec/panel.hpp"
#include "covspec/quadrature.hpp"
#include "covspec/rng.hpp"
#include "covspec/spectra.hpp"
#include "covspec/theory_density.hpp"
#include "covspec/theory_spacing.hpp"
#include "covspec/tracy_widom.hpp"
#include "covspec/unfolding.hpp"
