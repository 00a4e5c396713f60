#pragma once

#include "casimir/dielectric.hpp"
#include "casimir/error.hpp"
#include "casimir/geometry.hpp"
#include "casimir/kernel.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/numerics.hpp"
#include "casimir/surface_scattering.hpp"
#include "casimir/units.hpp"
