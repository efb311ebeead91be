#pragma once

// Umbrella header for the library modules (the CLI lives in garchdiag/cli.hpp).
#include "garchdiag/diagnostics.hpp"
#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"
#include "garchdiag/io.hpp"
#include "garchdiag/kde.hpp"
#include "garchdiag/montecarlo.hpp"
#include "garchdiag/psp.hpp"
#include "garchdiag/qmle.hpp"
#include "garchdiag/variance_path.hpp"
