#pragma once

#include "seplab/bounds.hpp"
#include "seplab/distributions.hpp"
#include "seplab/error.hpp"
#include "seplab/experiment.hpp"
#include "seplab/networks.hpp"
#include "seplab/numerics.hpp"
#include "seplab/sample_io.hpp"
#include "seplab/witness.hpp"
