#pragma once

#include "alphapatch/bounds.hpp"
#include "alphapatch/cli.hpp"
#include "alphapatch/diagnostics.hpp"
#include "alphapatch/dynamics.hpp"
#include "alphapatch/errors.hpp"
#include "alphapatch/fields.hpp"
#include "alphapatch/gamma.hpp"
#include "alphapatch/io.hpp"
#include "alphapatch/kernel.hpp"
#include "alphapatch/parallel.hpp"
#include "alphapatch/quadrature.hpp"
#include "alphapatch/vec2.hpp"
