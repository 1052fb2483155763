#pragma once

#include "slipkf/errors.hpp"
#include "slipkf/filter.hpp"
#include "slipkf/io.hpp"
#include "slipkf/model.hpp"
#include "slipkf/simulate.hpp"
#include "slipkf/tracker.hpp"
