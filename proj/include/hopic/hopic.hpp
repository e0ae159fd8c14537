#pragma once

#include "hopic/kernels.hpp"
#include "hopic/mesh.hpp"
#include "hopic/stencils.hpp"
#include "hopic/multigrid.hpp"
#include "hopic/particles.hpp"
#include "hopic/integrator.hpp"
#include "hopic/remap.hpp"
#include "hopic/problems.hpp"
#include "hopic/diagnostics.hpp"
#include "hopic/simulation.hpp"
