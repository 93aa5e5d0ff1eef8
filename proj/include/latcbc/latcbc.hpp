#pragma once

// Umbrella header.

#include "latcbc/numerics.hpp"
#include "latcbc/weights.hpp"
#include "latcbc/wce.hpp"
#include "latcbc/kernel.hpp"
#include "latcbc/result.hpp"
#include "latcbc/cbc.hpp"
#include "latcbc/construct.hpp"
#include "latcbc/io.hpp"
#include "latcbc/config.hpp"
#include "latcbc/pool.hpp"
#include "latcbc/run.hpp"
#include "latcbc/tables.hpp"
