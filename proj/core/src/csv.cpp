#include "rrde/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace rrde {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    double v = 0.0;
    const char* first = s.data() + begin;
    if (begin < end && *first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + end, v);
    if (res.ec != std::errc() || res.ptr != s.data() + end || begin == end) {
        throw InputError("not a number: '" + s + "'");
    }
    return v;
}

void write_csv(std::ostream& out, const TimeGrid& grid, const std::vector<std::string>& names,
               const std::vector<const Matrix*>& blocks)
{
    Eigen::Index total = 0;
    for (const Matrix* b : blocks) {
        if (b->cols() != static_cast<Eigen::Index>(grid.size())) {
            throw InputError("CSV block does not match the grid length");
        }
        total += b->rows();
    }
    if (static_cast<Eigen::Index>(names.size()) != total) {
        throw InputError("CSV header does not match the number of columns");
    }
    out << "time";
    for (const std::string& n : names) {
        out << ',' << n;
    }
    out << '\n';
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out << format_double(grid[j]);
        for (const Matrix* b : blocks) {
            for (Eigen::Index i = 0; i < b->rows(); ++i) {
                out << ',' << format_double((*b)(i, static_cast<Eigen::Index>(j)));
            }
        }
        out << '\n';
    }
}

void write_csv(std::ostream& out, const GridPath& x, const std::string& prefix)
{
    std::vector<std::string> names;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        names.push_back(prefix + std::to_string(i + 1));
    }
    write_csv(out, x.grid(), names, {&x.values()});
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace

CsvTable read_csv_table(std::istream& in)
{
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("CSV input is empty");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    t.header = split(line);
    if (t.header.size() < 2 || t.header.front() != "time") {
        throw InputError("CSV header must start with 'time' followed by at least one column");
    }
    const std::size_t cols = t.header.size() - 1;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != cols + 1) {
            throw InputError("CSV line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(cols + 1));
        }
        try {
            t.times.push_back(parse_double(fields[0]));
            std::vector<double> row;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                row.push_back(parse_double(fields[i]));
            }
            rows.push_back(std::move(row));
        } catch (const InputError& e) {
            throw InputError("CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    t.columns.resize(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        for (std::size_t i = 0; i < cols; ++i) {
            t.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
        }
    }
    return t;
}

GridPath read_csv(std::istream& in)
{
    CsvTable t = read_csv_table(in);
    return GridPath(TimeGrid(std::move(t.times)), std::move(t.columns));
}

GridPath read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    try {
        return read_csv(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_csv_file(const std::string& path, const GridPath& x, const std::string& prefix)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    write_csv(out, x, prefix);
}

}  // namespace rrde
