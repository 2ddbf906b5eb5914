#pragma once

#include "geometry.hpp"
#include "measurement.hpp"
#include "estimators.hpp"
#include "crlb.hpp"
#include "bench.hpp"
#include "csv.hpp"
#include "config.hpp"
