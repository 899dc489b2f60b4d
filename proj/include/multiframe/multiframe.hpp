#pragma once

#include "multiframe/errors.hpp"
#include "multiframe/so.hpp"
#include "multiframe/tfg.hpp"
#include "multiframe/mfg.hpp"
#include "multiframe/dynamics.hpp"
#include "multiframe/observations.hpp"
#include "multiframe/imu.hpp"
#include "multiframe/filters.hpp"
#include "multiframe/dcio.hpp"
