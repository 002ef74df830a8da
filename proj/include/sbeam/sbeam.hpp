#pragma once

#include "sbeam/errors.hpp"
#include "sbeam/quadrature.hpp"
#include "sbeam/philox.hpp"
#include "sbeam/parallel.hpp"
#include "sbeam/beam_operator.hpp"
#include "sbeam/spectral_sde.hpp"
#include "sbeam/energy_monitor.hpp"
#include "sbeam/taylor_jet.hpp"
#include "sbeam/carleman_weights.hpp"
#include "sbeam/manufactured.hpp"
#include "sbeam/slices.hpp"
#include "sbeam/identity_checker.hpp"
#include "sbeam/estimate_verifier.hpp"
#include "sbeam/cli_runner.hpp"
