#pragma once

#include "optdes/errors.hpp"
#include "optdes/symmat.hpp"
#include "optdes/designspace.hpp"
#include "optdes/criteria.hpp"
#include "optdes/bound.hpp"
#include "optdes/solver.hpp"
#include "optdes/reference_problems.hpp"
#include "optdes/io.hpp"
