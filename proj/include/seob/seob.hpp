#pragma once

#include "seob/analysis.hpp"
#include "seob/belief.hpp"
#include "seob/commands.hpp"
#include "seob/dynamics.hpp"
#include "seob/errors.hpp"
#include "seob/game.hpp"
#include "seob/io.hpp"
#include "seob/oracle.hpp"
#include "seob/quadrature.hpp"
#include "seob/response.hpp"
#include "seob/rng.hpp"
#include "seob/verify.hpp"
