#pragma once

#include "qhedge/certificates.hpp"
#include "qhedge/channel.hpp"
#include "qhedge/error.hpp"
#include "qhedge/error_reduction.hpp"
#include "qhedge/game.hpp"
#include "qhedge/hedging.hpp"
#include "qhedge/io.hpp"
#include "qhedge/operator.hpp"
#include "qhedge/sdp/compile.hpp"
#include "qhedge/sdp/problem.hpp"
#include "qhedge/sdp/solver.hpp"
#include "qhedge/spaces.hpp"
