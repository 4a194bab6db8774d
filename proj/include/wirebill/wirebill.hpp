#pragma once

// Wire billiards: chord-reflection dynamics on closed curves in R^n.
// Umbrella header.

#include "wirebill/chord.hpp"
#include "wirebill/curve.hpp"
#include "wirebill/ellipsoid.hpp"
#include "wirebill/glancing.hpp"
#include "wirebill/lazutkin.hpp"
#include "wirebill/polygon.hpp"
#include "wirebill/reflection.hpp"
#include "wirebill/striction.hpp"
#include "wirebill/types.hpp"
