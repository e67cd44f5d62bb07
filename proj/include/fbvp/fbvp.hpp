#pragma once

#include "fbvp/analysis.hpp"
#include "fbvp/errors.hpp"
#include "fbvp/group_methods.hpp"
#include "fbvp/problem_catalog.hpp"
#include "fbvp/rk_integrators.hpp"
#include "fbvp/tables.hpp"
