#include "rrde/generators.hpp"

#include "rrde/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rrde {

const char* to_string(GeneratorKind kind)
{
    switch (kind) {
    case GeneratorKind::Brownian:
        return "brownian";
    case GeneratorKind::CompoundPoisson:
        return "compound_poisson";
    case GeneratorKind::SmoothSine:
        return "smooth_sine";
    case GeneratorKind::Polynomial:
        return "polynomial";
    case GeneratorKind::Staircase:
        return "staircase";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& s)
{
    if (s == "brownian") return GeneratorKind::Brownian;
    if (s == "compound_poisson") return GeneratorKind::CompoundPoisson;
    if (s == "smooth_sine") return GeneratorKind::SmoothSine;
    if (s == "polynomial") return GeneratorKind::Polynomial;
    if (s == "staircase") return GeneratorKind::Staircase;
    throw InputError("unknown generator kind '" + s + "'");
}

void GeneratorSpec::validate() const
{
    if (dim == 0) {
        throw InputError("generator dimension must be positive");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    if (start.size() != 0 && start.size() != d) {
        throw InputError("start has size " + std::to_string(start.size()) + ", expected " +
                         std::to_string(dim));
    }
    if (!(volatility >= 0.0)) {
        throw InputError("volatility must be non-negative");
    }
    if (!(rate >= 0.0)) {
        throw InputError("jump rate must be non-negative");
    }
    if (!(jump_low <= jump_high)) {
        throw InputError("jump size bounds must satisfy low <= high");
    }
    if (!std::isfinite(drift) || !std::isfinite(amplitude) || !std::isfinite(frequency) ||
        !std::isfinite(phase) || !std::isfinite(phase_shift)) {
        throw InputError("generator parameters must be finite");
    }
    for (const Vector& c : coefficients) {
        if (c.size() != d) {
            throw InputError("polynomial coefficients must have size " + std::to_string(dim));
        }
    }
    for (const StaircaseStep& s : steps) {
        if (s.size.size() != d) {
            throw InputError("staircase step sizes must have size " + std::to_string(dim));
        }
    }
}

namespace {

std::size_t nearest_node(const TimeGrid& grid, double t)
{
    std::size_t j = grid.index_at_or_before(t);
    if (j + 1 < grid.size() && grid[j + 1] - t < t - grid[j]) {
        ++j;
    }
    return j;
}

}  // namespace

GridPath generate(const GeneratorSpec& spec, const TimeGrid& grid)
{
    spec.validate();
    const auto d = static_cast<Eigen::Index>(spec.dim);
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Vector start = spec.start.size() == 0 ? Vector::Zero(d) : spec.start;
    Matrix v(d, n);

    switch (spec.kind) {
    case GeneratorKind::Brownian: {
        Rng rng(spec.seed);
        v.col(0) = start;
        for (Eigen::Index j = 1; j < n; ++j) {
            const double dt = grid[static_cast<std::size_t>(j)] - grid[static_cast<std::size_t>(j - 1)];
            const double scale = spec.volatility * std::sqrt(dt);
            for (Eigen::Index i = 0; i < d; ++i) {
                v(i, j) = v(i, j - 1) + spec.drift * dt + scale * rng.normal();
            }
        }
        break;
    }
    case GeneratorKind::CompoundPoisson: {
        Rng rng(spec.seed);
        Matrix jumps = Matrix::Zero(d, n);
        if (spec.rate > 0.0) {
            double t = 0.0;
            while (true) {
                t += rng.exponential(spec.rate);
                if (t > grid.t_end()) {
                    break;
                }
                const auto node = static_cast<Eigen::Index>(std::max<std::size_t>(1, nearest_node(grid, t)));
                for (Eigen::Index i = 0; i < d; ++i) {
                    jumps(i, node) += rng.uniform(spec.jump_low, spec.jump_high);
                }
            }
        }
        v.col(0) = start;
        for (Eigen::Index j = 1; j < n; ++j) {
            v.col(j) = v.col(j - 1) + jumps.col(j);
        }
        break;
    }
    case GeneratorKind::SmoothSine: {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = grid[static_cast<std::size_t>(j)];
            for (Eigen::Index i = 0; i < d; ++i) {
                v(i, j) = start(i) + spec.amplitude * std::sin(2.0 * std::numbers::pi *
                                                                   spec.frequency * t +
                                                               spec.phase +
                                                               static_cast<double>(i) * spec.phase_shift);
            }
        }
        break;
    }
    case GeneratorKind::Polynomial: {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = grid[static_cast<std::size_t>(j)];
            Vector acc = Vector::Zero(d);
            for (auto it = spec.coefficients.rbegin(); it != spec.coefficients.rend(); ++it) {
                acc = acc * t + *it;
            }
            v.col(j) = start + acc;
        }
        break;
    }
    case GeneratorKind::Staircase: {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = grid[static_cast<std::size_t>(j)];
            Vector acc = start;
            for (const StaircaseStep& s : spec.steps) {
                if (t >= s.time) {
                    acc += s.size;
                }
            }
            v.col(j) = acc;
        }
        break;
    }
    }
    return GridPath(grid, std::move(v));
}

VectorField constant_field(const Matrix& c)
{
    const auto n = static_cast<std::size_t>(c.rows());
    const auto d = static_cast<std::size_t>(c.cols());
    auto zeros = [n, d](std::size_t count) {
        return [n, d, count](const Vector&) {
            return std::vector<Matrix>(count, Matrix::Zero(static_cast<Eigen::Index>(n),
                                                           static_cast<Eigen::Index>(d)));
        };
    };
    return VectorField(
        "constant", n, d, [c](const Vector&) { return c; }, zeros(n), zeros(n * n),
        zeros(n * n * n), FieldBounds{c.norm(), 0.0, 0.0, 0.0}, true);
}

VectorField tanh_field(const Matrix& w, const Matrix& b, const Matrix& c, std::string name)
{
    const Eigen::Index n = w.rows();
    const Eigen::Index d = w.cols();
    if (b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != d) {
        throw InputError("tanh field needs W and C of size n x d and B of size n x n");
    }
    const auto un = static_cast<std::size_t>(n);

    auto value = [w, b, c](const Vector& y) {
        const Vector s = b * y;
        Matrix out = c;
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            out.row(i) += w.row(i) * std::tanh(s(i));
        }
        return out;
    };
    // order-th derivative of tanh at each (B y)_i, then the tensor W_{ia} t^(r)(s_i) prod B_{i.}
    auto derivative = [w, b, un](int order) {
        return [w, b, un, order](const Vector& y) {
            const Vector s = b * y;
            Vector g(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i) {
                const double t = std::tanh(s(i));
                const double sech2 = 1.0 - t * t;
                if (order == 1) {
                    g(i) = sech2;
                } else if (order == 2) {
                    g(i) = -2.0 * t * sech2;
                } else {
                    g(i) = -2.0 * sech2 * sech2 + 4.0 * t * t * sech2;
                }
            }
            std::size_t count = 1;
            for (int r = 0; r < order; ++r) {
                count *= un;
            }
            std::vector<Matrix> out(count, Matrix::Zero(w.rows(), w.cols()));
            for (std::size_t idx = 0; idx < count; ++idx) {
                // idx = (k * n + l) * n + m in base n, most significant first
                std::vector<std::size_t> digits(static_cast<std::size_t>(order));
                std::size_t rest = idx;
                for (int r = order - 1; r >= 0; --r) {
                    digits[static_cast<std::size_t>(r)] = rest % un;
                    rest /= un;
                }
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    double coef = g(i);
                    for (std::size_t k : digits) {
                        coef *= b(i, static_cast<Eigen::Index>(k));
                    }
                    if (coef != 0.0) {
                        out[idx].row(i) = w.row(i) * coef;
                    }
                }
            }
            return out;
        };
    };

    const double wn = w.norm();
    const double bn = b.norm();
    // sup |tanh''| = 4 / (3 sqrt 3) < 0.77, sup |tanh'''| = 2
    FieldBounds bounds{c.norm() + wn, wn * bn, 0.77 * wn * bn * bn, 2.0 * wn * bn * bn * bn};
    const bool lower = b.isLowerTriangular(0.0);
    return VectorField(std::move(name), un, static_cast<std::size_t>(d), value, derivative(1),
                       derivative(2), derivative(3), bounds, lower);
}

VectorField linear_field(const Matrix& c, const std::vector<Matrix>& slopes)
{
    const auto n = static_cast<std::size_t>(c.rows());
    const auto d = static_cast<std::size_t>(c.cols());
    if (slopes.size() != n) {
        throw InputError("linear field needs one slope matrix per state component");
    }
    bool lower = true;
    for (std::size_t k = 0; k < n; ++k) {
        if (slopes[k].rows() != c.rows() || slopes[k].cols() != c.cols()) {
            throw InputError("slope matrices must match the shape of C");
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (!slopes[k].row(static_cast<Eigen::Index>(i)).isZero(0.0)) {
                lower = false;
            }
        }
    }
    auto zeros = [c](std::size_t count) {
        return [c, count](const Vector&) {
            return std::vector<Matrix>(count, Matrix::Zero(c.rows(), c.cols()));
        };
    };
    double slope_norm = 0.0;
    for (const Matrix& m : slopes) {
        slope_norm += m.squaredNorm();
    }
    return VectorField(
        "linear", n, d,
        [c, slopes](const Vector& y) {
            Matrix out = c;
            for (std::size_t k = 0; k < slopes.size(); ++k) {
                out += slopes[k] * y(static_cast<Eigen::Index>(k));
            }
            return out;
        },
        [slopes](const Vector&) { return slopes; }, zeros(n * n), zeros(n * n * n),
        FieldBounds{std::numeric_limits<double>::infinity(), std::sqrt(slope_norm), 0.0, 0.0},
        lower);
}

namespace {

Matrix catalog_weights(std::size_t n, std::size_t d, double scale)
{
    Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index a = 0; a < w.cols(); ++a) {
            w(i, a) = scale / static_cast<double>(1 + i + a);
        }
    }
    return w;
}

Matrix catalog_coupling(std::size_t n, bool lower)
{
    Matrix b = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index k = 0; k < b.cols(); ++k) {
            if (k < i || (!lower && k > i)) {
                b(i, k) = 0.3;
            }
        }
    }
    return b;
}

}  // namespace

VectorField standard_field(const std::string& name, std::size_t n, std::size_t d)
{
    if (n == 0 || d == 0) {
        throw InputError("vector field dimensions must be positive");
    }
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(d);
    if (name == "constant") {
        return constant_field(catalog_weights(n, d, 1.0));
    }
    if (name == "tanh") {
        return tanh_field(catalog_weights(n, d, 0.8), catalog_coupling(n, false),
                          Matrix::Zero(rows, cols), "tanh");
    }
    if (name == "tanh_lower") {
        return tanh_field(catalog_weights(n, d, 0.8), catalog_coupling(n, true),
                          Matrix::Constant(rows, cols, 0.1), "tanh_lower");
    }
    throw InputError("unknown standard field '" + name + "' (expected constant, tanh or tanh_lower)");
}

std::vector<VectorField> standard_fields(std::size_t n, std::size_t d)
{
    return {standard_field("constant", n, d), standard_field("tanh", n, d),
            standard_field("tanh_lower", n, d)};
}

}  // namespace rrde
