#pragma once

#include "rheston/commands.hpp"
#include "rheston/grid.hpp"
#include "rheston/largetime.hpp"
#include "rheston/mgf.hpp"
#include "rheston/model.hpp"
#include "rheston/montecarlo.hpp"
#include "rheston/pricing.hpp"
#include "rheston/riccati.hpp"
#include "rheston/smalltime.hpp"
#include "rheston/special.hpp"
