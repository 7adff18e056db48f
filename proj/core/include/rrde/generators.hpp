#pragma once

#include "rrde/paths.hpp"
#include "rrde/vector_field.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rrde {

enum class GeneratorKind { Brownian, CompoundPoisson, SmoothSine, Polynomial, Staircase };

const char* to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& s);

struct StaircaseStep {
    double time = 0.0;
    Vector size;
};

/// Parameters of a driver or barrier generator. Every kind starts from `start`
/// (zero when empty) and is sampled exactly at the grid nodes.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Polynomial;
    std::size_t dim = 1;
    std::uint64_t seed = 0;
    Vector start;

    // brownian: start + drift t + volatility W_t, Gaussian increments scaled by sqrt(dt)
    double volatility = 1.0;
    double drift = 0.0;

    // compound_poisson: exponential inter-arrival times, each arrival rounded to the nearest
    // node in (0, T]; jump sizes uniform on [jump_low, jump_high] per component
    double rate = 1.0;
    double jump_low = -1.0;
    double jump_high = 1.0;

    // smooth_sine: start + amplitude sin(2 pi frequency t + phase + component * phase_shift)
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
    double phase_shift = 0.0;

    // polynomial: start + sum_k coefficients[k] t^k; coefficient vectors of size dim
    std::vector<Vector> coefficients;

    // staircase: start plus a jump of `size` at each step time
    std::vector<StaircaseStep> steps;

    /// Throws InputError on negative volatility or rate, inverted jump bounds,
    /// or vectors whose size differs from dim.
    void validate() const;
};

/// Deterministic given (spec, grid): the same inputs give the same path bit for bit.
GridPath generate(const GeneratorSpec& spec, const TimeGrid& grid);

/// Constant field f(y) = C.
VectorField constant_field(const Matrix& c);

/// f_{ia}(y) = C_{ia} + W_{ia} tanh((B y)_i), bounded with bounded derivatives of all orders.
/// Lower-triangular B gives a field of the lower-triangular class.
VectorField tanh_field(const Matrix& w, const Matrix& b, const Matrix& c, std::string name = "tanh");

/// f(y) = C + sum_k y_k M_k. Unbounded; meant for tests of the calculus, not the solvers'
/// well-posedness hypotheses.
VectorField linear_field(const Matrix& c, const std::vector<Matrix>& slopes);

/// Catalog for state dimension n and driver dimension d:
///   "constant"   f = fixed n x d matrix
///   "tanh"       tanh_field with a full coupling matrix B
///   "tanh_lower" tanh_field with lower-triangular B
std::vector<VectorField> standard_fields(std::size_t n, std::size_t d);
VectorField standard_field(const std::string& name, std::size_t n, std::size_t d);

}  // namespace rrde
