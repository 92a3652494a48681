#pragma once

#include "orbitlat/common.hpp"
#include "orbitlat/linalg.hpp"
#include "orbitlat/exterior.hpp"
#include "orbitlat/lattice.hpp"
#include "orbitlat/enumeration.hpp"
#include "orbitlat/minima.hpp"
#include "orbitlat/mincov.hpp"
#include "orbitlat/filtration.hpp"
#include "orbitlat/lp.hpp"
#include "orbitlat/orbit.hpp"
#include "orbitlat/convex.hpp"
#include "orbitlat/io.hpp"
