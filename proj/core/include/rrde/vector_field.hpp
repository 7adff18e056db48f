#pragma once

#include "rrde/paths.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rrde {

/// Declared sup-norm bounds of f and its derivatives. Infinite entries mark unbounded fields.
struct FieldBounds {
    double sup = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// f : R^n -> L(R^d, R^n), with analytically coded derivatives.
///
/// Derivative tensors are stored as flat lists of n x d matrices:
///   first:  slice k          = d f / d y_k
///   second: slice k*n + l    = d^2 f / d y_k d y_l
///   third:  slice (k*n+l)*n+m
class VectorField {
public:
    using Value = std::function<Matrix(const Vector&)>;
    using Derivative = std::function<std::vector<Matrix>(const Vector&)>;

    VectorField(std::string name, std::size_t state_dim, std::size_t driver_dim, Value f,
                Derivative df, Derivative d2f, std::optional<Derivative> d3f, FieldBounds bounds,
                bool lower_triangular);

    const std::string& name() const { return name_; }
    std::size_t state_dim() const { return n_; }
    std::size_t driver_dim() const { return d_; }
    const FieldBounds& bounds() const { return bounds_; }
    /// Component i depends only on y_1..y_i (the lower-triangular class).
    bool lower_triangular() const { return lower_triangular_; }
    bool has_third_derivative() const { return d3f_.has_value(); }

    Matrix operator()(const Vector& y) const;
    std::vector<Matrix> first(const Vector& y) const;
    std::vector<Matrix> second(const Vector& y) const;
    /// Throws InputError when no third derivative was declared.
    std::vector<Matrix> third(const Vector& y) const;

    /// ||f||_{C^k_b} = sum of declared bounds up to order k.
    double cb_norm(int k) const;

    /// Df(y) applied to a derivative Y' in R^{n x d}; result is the (n*d) x d matrix
    /// whose column b is vec(sum_k d_k f(y) Y'(k, b)) (column-major vec).
    Matrix derivative_along(const Vector& y, const Matrix& yprime) const;

    /// Second-order compensation Df(y) f(y) applied to a d x d area increment:
    ///   component r = sum_{a,b,k} d_k f_{r a}(y) f_{k b}(y) area(b, a).
    Vector compensation(const Vector& y, const Matrix& area) const;

private:
    std::string name_;
    std::size_t n_;
    std::size_t d_;
    Value f_;
    Derivative df_;
    Derivative d2f_;
    std::optional<Derivative> d3f_;
    FieldBounds bounds_;
    bool lower_triangular_;
};

/// Contraction of an (m) x d "derivative" matrix with a d x d area:
///   out_r = sum_{a,b} D(r + rows*a, b) area(b, a), for a derivative of an (rows x d) integrand.
Vector contract_area(const Matrix& derivative, const Matrix& area, std::size_t rows);

struct DerivativeCheck {
    double first_error = 0.0;   ///< max |central FD of f - Df| over probes
    double second_error = 0.0;  ///< max |central FD of Df - D^2 f|
    double third_error = 0.0;   ///< zero when no third derivative is declared
    bool consistent(double tol) const
    {
        return first_error <= tol && second_error <= tol && third_error <= tol;
    }
};

/// Directional central differences of f, Df, D^2 f at `probes` random points with
/// coordinates in [-radius, radius]. Errors are absolute, O(h^2) for smooth fields.
DerivativeCheck check_derivatives(const VectorField& f, std::size_t probes, double h,
                                  std::uint64_t seed, double radius = 2.0);

/// Checks the lower-triangular structure numerically: perturbing y_j, j > i, must leave
/// row i of f unchanged. Returns the largest change observed.
double lower_triangular_defect(const VectorField& f, std::size_t probes, std::uint64_t seed);

}  // namespace rrde
