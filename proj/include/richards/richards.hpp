#pragma once

// Umbrella header: the whole library in dependency order.

#include "richards/mesh.hpp"
#include "richards/quadrature.hpp"
#include "richards/constitutive.hpp"
#include "richards/field.hpp"
#include "richards/sparse.hpp"
#include "richards/assembly.hpp"
#include "richards/linearize.hpp"
#include "richards/eqflux.hpp"
#include "richards/estimate.hpp"
#include "richards/driver.hpp"
#include "richards/cases.hpp"
#include "richards/io.hpp"
