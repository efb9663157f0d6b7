#pragma once

#include "gme/certify.hpp"
#include "gme/constructions.hpp"
#include "gme/core.hpp"
#include "gme/harness.hpp"
#include "gme/io.hpp"
#include "gme/linalg.hpp"
#include "gme/partitions.hpp"
#include "gme/pure_structure.hpp"
#include "gme/random.hpp"
#include "gme/sdp.hpp"
#include "gme/state.hpp"
