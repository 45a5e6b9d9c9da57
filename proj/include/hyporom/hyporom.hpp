#pragma once

#include "hyporom/errors.hpp"
#include "hyporom/grid.hpp"
#include "hyporom/balance_laws.hpp"
#include "hyporom/fom.hpp"
#include "hyporom/snapshots.hpp"
#include "hyporom/snapshot_io.hpp"
#include "hyporom/pod.hpp"
#include "hyporom/deim.hpp"
#include "hyporom/rom_operators.hpp"
#include "hyporom/rom.hpp"
#include "hyporom/config.hpp"
#include "hyporom/harness.hpp"
