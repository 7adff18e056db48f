#pragma once

#include "rrde/csv.hpp"
#include "rrde/generators.hpp"
#include "rrde/paths.hpp"
#include "rrde/random.hpp"
#include "rrde/rough.hpp"
#include "rrde/skorokhod.hpp"
#include "rrde/solve_report.hpp"
#include "rrde/vector_field.hpp"
#include "rrde/young.hpp"
