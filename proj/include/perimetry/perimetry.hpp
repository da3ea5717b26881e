#pragma once

#include "perimetry/vector.hpp"
#include "perimetry/random.hpp"
#include "perimetry/geom_core.hpp"
#include "perimetry/shapes.hpp"
#include "perimetry/shape_io.hpp"
#include "perimetry/gridset.hpp"
#include "perimetry/exact_union.hpp"
#include "perimetry/sampling.hpp"
#include "perimetry/dilation_lab.hpp"
#include "perimetry/counterexample.hpp"
#include "perimetry/boolean_lab.hpp"
#include "perimetry/suite.hpp"
#include "perimetry/cli_run.hpp"
