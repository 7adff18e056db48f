#pragma once

#include "scenario.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace rrde::cli {

enum ExitCode : int { Ok = 0, InputFailure = 1, NotConverged = 2 };

struct Options {
    std::string command;
    std::optional<std::string> scenario;
    std::optional<std::string> input;
    std::optional<std::string> barrier;
    std::optional<std::string> out;
    std::optional<std::string> report;
    Overrides overrides;
    std::string format = "csv";
    std::optional<double> p;
    std::optional<double> s;
    std::optional<double> t;
    bool open = false;
    bool timing = false;
};

/// Runs one subcommand. Input errors propagate as InputError; solver failures return 2.
int run(const Options& opt, std::ostream& err);

/// Writes `content` to `path` via a temporary file and rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace rrde::cli
