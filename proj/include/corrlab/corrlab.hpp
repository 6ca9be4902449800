#pragma once

#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/operators.hpp"
#include "corrlab/states.hpp"
#include "corrlab/corrspec.hpp"
#include "corrlab/dynamics.hpp"
#include "corrlab/pauli.hpp"
#include "corrlab/config.hpp"
#include "corrlab/commands.hpp"
#include "corrlab/acceptance.hpp"
