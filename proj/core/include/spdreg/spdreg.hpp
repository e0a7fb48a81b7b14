#pragma once

#include "spdreg/analysis.hpp"
#include "spdreg/errors.hpp"
#include "spdreg/field.hpp"
#include "spdreg/functional.hpp"
#include "spdreg/io.hpp"
#include "spdreg/matrix.hpp"
#include "spdreg/optim.hpp"
#include "spdreg/parallel.hpp"
#include "spdreg/rng.hpp"
#include "spdreg/spd.hpp"
#include "spdreg/synth.hpp"
