#pragma once

#include "quadsolve/numerics.hpp"
#include "quadsolve/canonical.hpp"
#include "quadsolve/transform.hpp"
#include "quadsolve/inversion.hpp"
#include "quadsolve/solver.hpp"
#include "quadsolve/extensions.hpp"
#include "quadsolve/oracle.hpp"
