#pragma once

#include "normsol/commands.hpp"
#include "normsol/config.hpp"
#include "normsol/dynamics.hpp"
#include "normsol/energy.hpp"
#include "normsol/error.hpp"
#include "normsol/field.hpp"
#include "normsol/grid.hpp"
#include "normsol/ground_state.hpp"
#include "normsol/io.hpp"
#include "normsol/landscape.hpp"
#include "normsol/optimizer.hpp"
#include "normsol/potential.hpp"
