#include "scenario.hpp"

#include <fstream>
#include <set>

namespace rrde::cli {

namespace {

std::string child(const std::string& where, const std::string& key)
{
    return where.empty() ? key : where + "." + key;
}

std::string index(const std::string& where, std::size_t i)
{
    return where + "[" + std::to_string(i) + "]";
}

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) {
        throw InputError(where + ": expected an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw InputError(child(where, it.key()) + ": unknown field");
        }
    }
}

double as_number(const json& v, const std::string& where)
{
    if (!v.is_number()) {
        throw InputError(where + ": expected a number");
    }
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) {
        throw InputError(child(where, key) + ": missing");
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        throw InputError(child(where, key) + ": expected a string");
    }
    return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback)
{
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        throw InputError(child(where, key) + ": expected true or false");
    }
    return obj.at(key).get<bool>();
}

/// rows x cols of a nested array, or nullopt for scalars.
std::optional<std::pair<Eigen::Index, Eigen::Index>> matrix_shape(const json& v)
{
    if (v.is_array() && !v.empty() && v.front().is_array()) {
        return std::make_pair(static_cast<Eigen::Index>(v.size()),
                              static_cast<Eigen::Index>(v.front().size()));
    }
    return std::nullopt;
}

PicardStart parse_start(const json& obj, const std::string& where)
{
    if (!obj.contains("initial_guess")) {
        return PicardStart::Constant;
    }
    try {
        return picard_start_from_string(get_string(obj, "initial_guess", where));
    } catch (const InputError& e) {
        throw InputError(child(where, "initial_guess") + ": " + e.what());
    }
}

}  // namespace

double get_number(const json& obj, const std::string& key, const std::string& where,
                  std::optional<double> fallback)
{
    if (!obj.contains(key)) {
        if (fallback) {
            return *fallback;
        }
        throw InputError(child(where, key) + ": missing");
    }
    return as_number(obj.at(key), child(where, key));
}

std::uint64_t get_count(const json& obj, const std::string& key, const std::string& where,
                        std::optional<std::uint64_t> fallback)
{
    if (!obj.contains(key)) {
        if (fallback) {
            return *fallback;
        }
        throw InputError(child(where, key) + ": missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw InputError(child(where, key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

Matrix get_matrix(const json& value, const std::string& where, Eigen::Index rows,
                  Eigen::Index cols)
{
    if (value.is_number()) {
        return Matrix::Constant(rows, cols, value.get<double>());
    }
    if (!value.is_array()) {
        throw InputError(where + ": expected a number or a nested array");
    }
    if (!value.empty() && !value.front().is_array()) {
        // flat arrays are accepted for single rows or single columns
        if (rows != 1 && cols != 1) {
            throw InputError(where + ": expected " + std::to_string(rows) + " rows");
        }
        const Vector v = get_vector(value, where, rows * cols);
        return rows == 1 ? Matrix(v.transpose()) : Matrix(v);
    }
    if (static_cast<Eigen::Index>(value.size()) != rows) {
        throw InputError(where + ": expected " + std::to_string(rows) + " rows, got " +
                         std::to_string(value.size()));
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = value.at(static_cast<std::size_t>(i));
        const std::string rw = index(where, static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw InputError(rw + ": expected " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index a = 0; a < cols; ++a) {
            m(i, a) = as_number(row.at(static_cast<std::size_t>(a)),
                                index(rw, static_cast<std::size_t>(a)));
        }
    }
    return m;
}

Vector get_vector(const json& value, const std::string& where, Eigen::Index size)
{
    if (value.is_number()) {
        return Vector::Constant(size, value.get<double>());
    }
    if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != size) {
        throw InputError(where + ": expected a number or an array of " + std::to_string(size) +
                         " numbers");
    }
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = as_number(value.at(static_cast<std::size_t>(i)),
                         index(where, static_cast<std::size_t>(i)));
    }
    return v;
}

GeneratorSpec parse_generator(const json& spec, const std::string& where, std::size_t dim,
                              std::uint64_t default_seed)
{
    only_keys(spec, where, {"kind", "params"});
    GeneratorSpec g;
    try {
        g.kind = generator_kind_from_string(get_string(spec, "kind", where));
    } catch (const InputError& e) {
        throw InputError(child(where, "kind") + ": " + e.what());
    }
    const json params = spec.value("params", json::object());
    const std::string pw = child(where, "params");
    only_keys(params, pw,
              {"seed", "dim", "start", "volatility", "drift", "rate", "jump_low", "jump_high",
               "amplitude", "frequency", "phase", "phase_shift", "coefficients", "steps"});
    if (params.contains("dim") && get_count(params, "dim", pw) != dim) {
        throw InputError(child(pw, "dim") + ": expected " + std::to_string(dim));
    }
    g.dim = dim;
    const auto d = static_cast<Eigen::Index>(dim);
    g.seed = get_count(params, "seed", pw, default_seed);
    if (params.contains("start")) {
        g.start = get_vector(params.at("start"), child(pw, "start"), d);
    }
    g.volatility = get_number(params, "volatility", pw, g.volatility);
    g.drift = get_number(params, "drift", pw, g.drift);
    g.rate = get_number(params, "rate", pw, g.rate);
    g.jump_low = get_number(params, "jump_low", pw, g.jump_low);
    g.jump_high = get_number(params, "jump_high", pw, g.jump_high);
    g.amplitude = get_number(params, "amplitude", pw, g.amplitude);
    g.frequency = get_number(params, "frequency", pw, g.frequency);
    g.phase = get_number(params, "phase", pw, g.phase);
    g.phase_shift = get_number(params, "phase_shift", pw, g.phase_shift);
    if (params.contains("coefficients")) {
        const json& c = params.at("coefficients");
        const std::string cw = child(pw, "coefficients");
        if (!c.is_array()) {
            throw InputError(cw + ": expected an array");
        }
        for (std::size_t k = 0; k < c.size(); ++k) {
            g.coefficients.push_back(get_vector(c.at(k), index(cw, k), d));
        }
    }
    if (params.contains("steps")) {
        const json& s = params.at("steps");
        const std::string sw = child(pw, "steps");
        if (!s.is_array()) {
            throw InputError(sw + ": expected an array");
        }
        for (std::size_t k = 0; k < s.size(); ++k) {
            const std::string kw = index(sw, k);
            only_keys(s.at(k), kw, {"time", "size"});
            if (!s.at(k).contains("size")) {
                throw InputError(child(kw, "size") + ": missing");
            }
            g.steps.push_back(
                {get_number(s.at(k), "time", kw), get_vector(s.at(k).at("size"), child(kw, "size"), d)});
        }
    }
    try {
        g.validate();
    } catch (const InputError& e) {
        throw InputError(pw + ": " + e.what());
    }
    return g;
}

Scenario::Scenario(json doc, std::filesystem::path base_dir, Overrides ov)
    : doc_(std::move(doc)), base_dir_(std::move(base_dir)), ov_(ov)
{
    only_keys(doc_, "scenario",
              {"name", "seed", "p", "q", "delta", "tol", "max_iter", "theta", "adaptive_damping",
               "contraction_target", "shrink_windows", "max_shrinks", "initial_guess", "grid",
               "y0", "field", "driver_a", "driver_x", "driver", "barrier", "input",
               "stability", "uniqueness"});
    seed_ = ov_.seed ? *ov_.seed : get_count(doc_, "seed", "", 0);
}

Scenario Scenario::load(const std::filesystem::path& file, Overrides ov)
{
    std::ifstream in(file);
    if (!in) {
        throw InputError("cannot open scenario '" + file.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(file.string() + ": invalid JSON: " + e.what());
    }
    return Scenario(std::move(doc), file.parent_path(), ov);
}

Scenario Scenario::with_seed(std::uint64_t seed) const
{
    Overrides ov = ov_;
    ov.seed = seed;
    return Scenario(doc_, base_dir_, ov);
}

json Scenario::section(const std::string& key) const
{
    return doc_.value(key, json::object());
}

TimeGrid Scenario::grid() const
{
    if (!doc_.contains("grid")) {
        throw InputError("grid: missing");
    }
    const json& g = doc_.at("grid");
    only_keys(g, "grid", {"t_end", "n", "times", "csv"});
    try {
        if (ov_.grid_n) {
            return TimeGrid::uniform(get_number(g, "t_end", "grid", 1.0), *ov_.grid_n);
        }
        if (g.contains("times")) {
            const json& t = g.at("times");
            if (!t.is_array()) {
                throw InputError("grid.times: expected an array");
            }
            std::vector<double> times;
            for (std::size_t i = 0; i < t.size(); ++i) {
                times.push_back(as_number(t.at(i), index("grid.times", i)));
            }
            return TimeGrid(std::move(times));
        }
        if (g.contains("csv")) {
            const std::string file = get_string(g, "csv", "grid");
            return read_csv_file((base_dir_ / file).string()).grid();
        }
        return TimeGrid::uniform(get_number(g, "t_end", "grid", 1.0),
                                 static_cast<std::size_t>(get_count(g, "n", "grid")));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind("grid", 0) == 0 ? msg : "grid: " + msg);
    }
}

Vector Scenario::y0() const
{
    if (!doc_.contains("y0")) {
        throw InputError("y0: missing");
    }
    const json& v = doc_.at("y0");
    if (v.is_number()) {
        return Vector::Constant(1, v.get<double>());
    }
    if (!v.is_array() || v.empty()) {
        throw InputError("y0: expected a number or a non-empty array");
    }
    return get_vector(v, "y0", static_cast<Eigen::Index>(v.size()));
}

VectorField Scenario::field(std::size_t n) const
{
    if (!doc_.contains("field")) {
        throw InputError("field: missing");
    }
    const json& f = doc_.at("field");
    only_keys(f, "field", {"kind", "params"});
    const std::string kind = get_string(f, "kind", "field");
    const json params = f.value("params", json::object());
    only_keys(params, "field.params", {"d", "C", "W", "B", "slopes"});
    const auto rows = static_cast<Eigen::Index>(n);

    Eigen::Index d = 0;
    if (params.contains("d")) {
        d = static_cast<Eigen::Index>(get_count(params, "d", "field.params"));
    } else {
        for (const char* key : {"C", "W"}) {
            if (params.contains(key)) {
                if (auto shape = matrix_shape(params.at(key))) {
                    d = shape->second;
                } else if (params.at(key).is_array() && n == 1) {
                    d = static_cast<Eigen::Index>(params.at(key).size());
                }
                if (d > 0) break;
            }
        }
    }
    if (d == 0) d = 1;
    const auto ud = static_cast<std::size_t>(d);

    try {
        if (kind == "constant") {
            if (!params.contains("C")) {
                return standard_field("constant", n, ud);
            }
            return constant_field(get_matrix(params.at("C"), "field.params.C", rows, d));
        }
        if (kind == "tanh" || kind == "tanh_lower") {
            if (!params.contains("W") && !params.contains("B") && !params.contains("C")) {
                return standard_field(kind, n, ud);
            }
            const Matrix w = params.contains("W")
                                 ? get_matrix(params.at("W"), "field.params.W", rows, d)
                                 : Matrix::Ones(rows, d);
            const Matrix b = params.contains("B")
                                 ? get_matrix(params.at("B"), "field.params.B", rows, rows)
                                 : Matrix::Identity(rows, rows);
            const Matrix c = params.contains("C")
                                 ? get_matrix(params.at("C"), "field.params.C", rows, d)
                                 : Matrix::Zero(rows, d);
            if (kind == "tanh_lower" && !b.isLowerTriangular(0.0)) {
                throw InputError("field.params.B: tanh_lower needs a lower-triangular B");
            }
            return tanh_field(w, b, c, kind);
        }
        if (kind == "linear") {
            const Matrix c = params.contains("C")
                                 ? get_matrix(params.at("C"), "field.params.C", rows, d)
                                 : Matrix::Zero(rows, d);
            std::vector<Matrix> slopes;
            if (params.contains("slopes")) {
                const json& s = params.at("slopes");
                if (!s.is_array() || s.size() != n) {
                    throw InputError("field.params.slopes: expected " + std::to_string(n) +
                                     " matrices");
                }
                for (std::size_t k = 0; k < n; ++k) {
                    slopes.push_back(get_matrix(s.at(k), index("field.params.slopes", k), rows, d));
                }
            } else {
                slopes.assign(n, Matrix::Zero(rows, d));
            }
            return linear_field(c, slopes);
        }
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind("field", 0) == 0 ? msg : "field: " + msg);
    }
    throw InputError("field.kind: unknown field '" + kind +
                     "' (expected constant, tanh, tanh_lower or linear)");
}

GridPath Scenario::path_from(const json& spec, const std::string& where, std::size_t dim,
                             const TimeGrid& grid, std::uint64_t slot) const
{
    if (!spec.is_object()) {
        throw InputError(where + ": expected an object");
    }
    const std::string kind = get_string(spec, "kind", where);
    if (kind == "csv") {
        only_keys(spec, where, {"kind", "path"});
        const std::string file = get_string(spec, "path", where);
        GridPath x = read_csv_file((base_dir_ / file).string());
        if (x.dim() != dim) {
            throw InputError(child(where, "path") + ": CSV has " + std::to_string(x.dim()) +
                             " columns, expected " + std::to_string(dim));
        }
        if (x.grid().t_end() != grid.t_end()) {
            throw InputError(child(where, "path") + ": CSV horizon differs from grid.t_end");
        }
        return x;
    }
    const std::uint64_t seed = splitmix(seed_ ^ splitmix(slot));
    GeneratorSpec g = parse_generator(spec, where, dim, seed);
    if (ov_.seed) {
        g.seed = seed;
    }
    return generate(g, grid);
}

GridPath Scenario::path(const std::string& key, std::size_t dim, const TimeGrid& grid,
                        std::uint64_t slot) const
{
    if (!doc_.contains(key)) {
        throw InputError(key + ": missing");
    }
    return path_from(doc_.at(key), key, dim, grid, slot);
}

YoungSolveConfig Scenario::young_config() const
{
    YoungSolveConfig c;
    c.p = get_number(doc_, "p", "", c.p);
    c.q = get_number(doc_, "q", "", c.q);
    c.delta = get_number(doc_, "delta", "", c.delta);
    c.tol = get_number(doc_, "tol", "", c.tol);
    c.max_iter = static_cast<std::size_t>(get_count(doc_, "max_iter", "", c.max_iter));
    c.contraction_target = get_number(doc_, "contraction_target", "", c.contraction_target);
    c.shrink_on_slow_contraction = get_bool(doc_, "shrink_windows", "", c.shrink_on_slow_contraction);
    c.max_shrinks = static_cast<std::size_t>(get_count(doc_, "max_shrinks", "", c.max_shrinks));
    c.start = parse_start(doc_, "");
    c.validate();
    return c;
}

RdeSolveConfig Scenario::rde_config() const
{
    RdeSolveConfig c;
    c.p = get_number(doc_, "p", "", c.p);
    if (doc_.contains("q")) {
        c.q = get_number(doc_, "q", "");
    }
    c.delta = get_number(doc_, "delta", "", c.delta);
    c.tol = get_number(doc_, "tol", "", c.tol);
    c.max_iter = static_cast<std::size_t>(get_count(doc_, "max_iter", "", c.max_iter));
    c.theta = get_number(doc_, "theta", "", c.theta);
    c.adaptive_damping = get_bool(doc_, "adaptive_damping", "", c.adaptive_damping);
    c.contraction_target = get_number(doc_, "contraction_target", "", c.contraction_target);
    c.shrink_on_slow_contraction = get_bool(doc_, "shrink_windows", "", c.shrink_on_slow_contraction);
    c.max_shrinks = static_cast<std::size_t>(get_count(doc_, "max_shrinks", "", c.max_shrinks));
    c.start = parse_start(doc_, "");
    c.validate();
    return c;
}

Level2RoughPath Scenario::rough_driver(std::size_t dim, const TimeGrid& grid) const
{
    if (!doc_.contains("driver")) {
        throw InputError("driver: missing");
    }
    const json& spec = doc_.at("driver");
    if (!spec.is_object()) {
        throw InputError("driver: expected an object");
    }
    const std::string kind = get_string(spec, "kind", "driver");
    json path_spec = spec;
    path_spec.erase("area_jumps");
    GridPath x;
    if (kind == "fv_lift") {
        only_keys(spec, "driver", {"kind", "source", "area_jumps"});
        if (!spec.contains("source")) {
            throw InputError("driver.source: missing");
        }
        x = path_from(spec.at("source"), "driver.source", dim, grid, 4);
    } else {
        if (kind == "csv") {
            only_keys(spec, "driver", {"kind", "path", "area_jumps"});
        } else {
            only_keys(spec, "driver", {"kind", "params", "area_jumps"});
        }
        x = path_from(path_spec, "driver", dim, grid, 4);
    }
    const double p = rde_config().p;
    if (!(x.grid() == grid)) {
        x = x.resample(merge(grid, x.grid()));
    }
    if (!spec.contains("area_jumps")) {
        return Level2RoughPath::left_point_lift(x, p);
    }
    const json& jumps = spec.at("area_jumps");
    if (!jumps.is_array()) {
        throw InputError("driver.area_jumps: expected an array");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    std::vector<Matrix> blocks(x.size() - 1, Matrix::Zero(d, d));
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        const std::string kw = index("driver.area_jumps", k);
        only_keys(jumps.at(k), kw, {"time", "area"});
        const double t = get_number(jumps.at(k), "time", kw);
        if (!(t > 0.0 && t <= x.grid().t_end())) {
            throw InputError(child(kw, "time") + ": must lie in (0, T]");
        }
        if (!jumps.at(k).contains("area")) {
            throw InputError(child(kw, "area") + ": missing");
        }
        const Matrix area = get_matrix(jumps.at(k).at("area"), child(kw, "area"), d, d);
        std::size_t node = x.grid().index_at_or_before(t);
        if (x.grid()[node] < t) {
            ++node;
        }
        blocks[node - 1] += area;
    }
    return Level2RoughPath::from_blocks(x, blocks, p);
}

}  // namespace rrde::cli
