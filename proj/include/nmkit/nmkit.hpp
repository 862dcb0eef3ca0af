// nmkit.hpp - Umbrella header

#pragma once

#include "nmkit/adc.hpp"
#include "nmkit/blp.hpp"
#include "nmkit/channel.hpp"
#include "nmkit/error.hpp"
#include "nmkit/qmat.hpp"
#include "nmkit/tcl.hpp"
#include "nmkit/witness.hpp"
