#pragma once

#include "superadd/bounds_lab.hpp"
#include "superadd/ensemble_opt.hpp"
#include "superadd/errors.hpp"
#include "superadd/kraus_io.hpp"
#include "superadd/mub_bases.hpp"
#include "superadd/operator_core.hpp"
#include "superadd/weyl_channels.hpp"
