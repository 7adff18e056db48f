#pragma once

#include "rrde/paths.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rrde {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a full field; throws InputError otherwise.
double parse_double(const std::string& s);

/// Rows `time,c1,...` with one row per grid node; `blocks` are stacked column-wise.
void write_csv(std::ostream& out, const TimeGrid& grid, const std::vector<std::string>& names,
               const std::vector<const Matrix*>& blocks);

/// Header `time,x1,...,xd`.
void write_csv(std::ostream& out, const GridPath& x, const std::string& prefix = "x");

struct CsvTable {
    std::vector<std::string> header;
    std::vector<double> times;
    Matrix columns;  ///< (header.size() - 1) x rows, time excluded
};

/// Requires a header whose first field is `time`, and equal-length numeric rows.
CsvTable read_csv_table(std::istream& in);

/// All non-time columns as one GridPath.
GridPath read_csv(std::istream& in);
GridPath read_csv_file(const std::string& path);
void write_csv_file(const std::string& path, const GridPath& x, const std::string& prefix = "x");

}  // namespace rrde
