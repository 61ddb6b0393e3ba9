#pragma once

#include "charpoly.hpp"
#include "dieudonne.hpp"
#include "error.hpp"
#include "isomorphism.hpp"
#include "matrix.hpp"
#include "newton.hpp"
#include "padic.hpp"
#include "rational.hpp"
#include "semilinear.hpp"
#include "slope.hpp"
#include "families.hpp"
