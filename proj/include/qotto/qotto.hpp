#pragma once

#include "qotto/bath.hpp"
#include "qotto/cycle.hpp"
#include "qotto/error.hpp"
#include "qotto/hierarchy.hpp"
#include "qotto/integrator.hpp"
#include "qotto/linalg.hpp"
#include "qotto/observables.hpp"
#include "qotto/parallel.hpp"
#include "qotto/propagation.hpp"
#include "qotto/quadrature.hpp"
#include "qotto/redfield.hpp"
#include "qotto/system.hpp"
