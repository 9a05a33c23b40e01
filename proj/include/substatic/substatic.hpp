#pragma once

#include "substatic/conformal.hpp"
#include "substatic/error.hpp"
#include "substatic/field3d.hpp"
#include "substatic/geometry.hpp"
#include "substatic/monotone.hpp"
#include "substatic/numerics.hpp"
#include "substatic/radial.hpp"
