#pragma once

#include "metalcast/vintage_store.hpp"

#include <string>

namespace metalcast {

/// First-release IP vintage file (vintages Jan to Apr 2012, observations
/// Jan 1992 to Feb 2012, two months of publication lag). The published rows
/// are exact; the rows between Mar 1992 and Sep 2011 are a log-linear
/// interpolation rounded to two decimals.
std::string ip_vintage_fixture_csv();
SeriesMeta ip_fixture_meta();

}  // namespace metalcast
