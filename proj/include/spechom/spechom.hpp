// Convenience umbrella for the whole library.

#pragma once

#include "spechom/config.hpp"
#include "spechom/experiments.hpp"
#include "spechom/field.hpp"
#include "spechom/field_io.hpp"
#include "spechom/green.hpp"
#include "spechom/grid.hpp"
#include "spechom/higher_order.hpp"
#include "spechom/microstructure.hpp"
#include "spechom/solver.hpp"
#include "spechom/spectral.hpp"
#include "spechom/tensor.hpp"
