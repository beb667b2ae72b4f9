#pragma once

// Convenience umbrella: every public module of the library.

#include "pathfit/bernstein.hpp"
#include "pathfit/experiment.hpp"
#include "pathfit/integrator.hpp"
#include "pathfit/io.hpp"
#include "pathfit/lagrangian.hpp"
#include "pathfit/path.hpp"
#include "pathfit/reference.hpp"
#include "pathfit/stepper.hpp"
#include "pathfit/systems.hpp"
#include "pathfit/types.hpp"
