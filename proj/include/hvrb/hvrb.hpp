#pragma once

#include "hvrb/campaign.hpp"
#include "hvrb/config.hpp"
#include "hvrb/converter.hpp"
#include "hvrb/degradation.hpp"
#include "hvrb/device.hpp"
#include "hvrb/error.hpp"
#include "hvrb/extraction.hpp"
#include "hvrb/format.hpp"
#include "hvrb/io.hpp"
