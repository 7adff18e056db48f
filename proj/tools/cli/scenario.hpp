#pragma once

#include <rrde/rrde.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace rrde::cli {

using json = nlohmann::json;

/// Command-line values that take precedence over the scenario file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> grid_n;
};

/// A parsed scenario document plus where relative CSV paths are resolved from.
class Scenario {
public:
    Scenario(json doc, std::filesystem::path base_dir, Overrides ov);
    static Scenario load(const std::filesystem::path& file, Overrides ov);

    const json& doc() const { return doc_; }
    std::uint64_t seed() const { return seed_; }
    /// Same scenario with a different master seed (used by sweeps).
    Scenario with_seed(std::uint64_t seed) const;

    TimeGrid grid() const;
    Vector y0() const;
    VectorField field(std::size_t n) const;

    /// Generator or CSV path object at `key`; `slot` decorrelates default seeds.
    GridPath path(const std::string& key, std::size_t dim, const TimeGrid& grid,
                  std::uint64_t slot) const;
    bool has(const std::string& key) const { return doc_.contains(key); }

    YoungSolveConfig young_config() const;
    RdeSolveConfig rde_config() const;
    Level2RoughPath rough_driver(std::size_t dim, const TimeGrid& grid) const;

    /// Optional object at `key`, empty when absent.
    json section(const std::string& key) const;

private:
    GridPath path_from(const json& spec, const std::string& where, std::size_t dim,
                       const TimeGrid& grid, std::uint64_t slot) const;

    json doc_;
    std::filesystem::path base_dir_;
    Overrides ov_;
    std::uint64_t seed_ = 0;
};

/// Field access with error messages that carry the JSON path.
double get_number(const json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback = std::nullopt);
std::uint64_t get_count(const json& obj, const std::string& key, const std::string& where,
                        std::optional<std::uint64_t> fallback = std::nullopt);
Matrix get_matrix(const json& value, const std::string& where, Eigen::Index rows,
                  Eigen::Index cols);
Vector get_vector(const json& value, const std::string& where, Eigen::Index size);

/// Generator parameters as read from a driver object's `params`.
GeneratorSpec parse_generator(const json& spec, const std::string& where, std::size_t dim,
                              std::uint64_t default_seed);

}  // namespace rrde::cli
