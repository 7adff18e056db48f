#include "rrde/vector_field.hpp"

#include "rrde/random.hpp"

#include <algorithm>

namespace rrde {

VectorField::VectorField(std::string name, std::size_t state_dim, std::size_t driver_dim, Value f,
                         Derivative df, Derivative d2f, std::optional<Derivative> d3f,
                         FieldBounds bounds, bool lower_triangular)
    : name_(std::move(name)),
      n_(state_dim),
      d_(driver_dim),
      f_(std::move(f)),
      df_(std::move(df)),
      d2f_(std::move(d2f)),
      d3f_(std::move(d3f)),
      bounds_(bounds),
      lower_triangular_(lower_triangular)
{
    if (n_ == 0 || d_ == 0) {
        throw InputError("vector field dimensions must be positive");
    }
    if (!f_ || !df_ || !d2f_) {
        throw InputError("vector field needs f, Df and D^2 f");
    }
}

Matrix VectorField::operator()(const Vector& y) const
{
    return f_(y);
}

std::vector<Matrix> VectorField::first(const Vector& y) const
{
    return df_(y);
}

std::vector<Matrix> VectorField::second(const Vector& y) const
{
    return d2f_(y);
}

std::vector<Matrix> VectorField::third(const Vector& y) const
{
    if (!d3f_) {
        throw InputError("vector field '" + name_ + "' declares no third derivative");
    }
    return (*d3f_)(y);
}

double VectorField::cb_norm(int k) const
{
    double s = bounds_.sup;
    if (k >= 1) s += bounds_.d1;
    if (k >= 2) s += bounds_.d2;
    if (k >= 3) s += bounds_.d3;
    return s;
}

Matrix VectorField::derivative_along(const Vector& y, const Matrix& yprime) const
{
    const auto n = static_cast<Eigen::Index>(n_);
    const auto d = static_cast<Eigen::Index>(d_);
    const std::vector<Matrix> df = df_(y);
    Matrix out = Matrix::Zero(n * d, yprime.cols());
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Map<const Vector> slice(df[static_cast<std::size_t>(k)].data(), n * d);
        for (Eigen::Index b = 0; b < yprime.cols(); ++b) {
            out.col(b) += slice * yprime(k, b);
        }
    }
    return out;
}

Vector VectorField::compensation(const Vector& y, const Matrix& area) const
{
    return contract_area(derivative_along(y, f_(y)), area, n_);
}

Vector contract_area(const Matrix& derivative, const Matrix& area, std::size_t rows)
{
    const auto n = static_cast<Eigen::Index>(rows);
    const Eigen::Index d = area.rows();
    Vector out = Vector::Zero(n);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            const double w = area(b, a);
            if (w != 0.0) {
                out += derivative.block(n * a, b, n, 1) * w;
            }
        }
    }
    return out;
}

namespace {

Vector random_point(Rng& rng, std::size_t n, double radius)
{
    Vector y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y(i) = rng.uniform(-radius, radius);
    }
    return y;
}

double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

DerivativeCheck check_derivatives(const VectorField& f, std::size_t probes, double h,
                                  std::uint64_t seed, double radius)
{
    Rng rng(seed);
    const std::size_t n = f.state_dim();
    DerivativeCheck out;
    for (std::size_t probe = 0; probe < probes; ++probe) {
        const Vector y = random_point(rng, n, radius);
        const auto d1 = f.first(y);
        const auto d2 = f.second(y);
        std::optional<std::vector<Matrix>> d3;
        if (f.has_third_derivative()) {
            d3 = f.third(y);
        }
        for (std::size_t k = 0; k < n; ++k) {
            Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
            e(static_cast<Eigen::Index>(k)) = h;
            const Matrix fd1 = (f(y + e) - f(y - e)) / (2.0 * h);
            out.first_error = std::max(out.first_error, max_abs(fd1 - d1[k]));

            const auto up = f.first(y + e);
            const auto dn = f.first(y - e);
            for (std::size_t l = 0; l < n; ++l) {
                const Matrix fd2 = (up[l] - dn[l]) / (2.0 * h);
                out.second_error = std::max(out.second_error, max_abs(fd2 - d2[k * n + l]));
            }
            if (d3) {
                const auto up2 = f.second(y + e);
                const auto dn2 = f.second(y - e);
                for (std::size_t lm = 0; lm < n * n; ++lm) {
                    const Matrix fd3 = (up2[lm] - dn2[lm]) / (2.0 * h);
                    out.third_error = std::max(out.third_error, max_abs(fd3 - (*d3)[k * n * n + lm]));
                }
            }
        }
    }
    return out;
}

double lower_triangular_defect(const VectorField& f, std::size_t probes, std::uint64_t seed)
{
    Rng rng(seed);
    const std::size_t n = f.state_dim();
    double defect = 0.0;
    for (std::size_t probe = 0; probe < probes; ++probe) {
        const Vector y = random_point(rng, n, 2.0);
        const Matrix base = f(y);
        for (std::size_t j = 1; j < n; ++j) {
            Vector moved = y;
            moved(static_cast<Eigen::Index>(j)) += rng.uniform(-1.0, 1.0);
            const Matrix changed = f(moved);
            for (std::size_t i = 0; i < j; ++i) {
                const auto row = static_cast<Eigen::Index>(i);
                defect = std::max(defect, (changed.row(row) - base.row(row)).cwiseAbs().maxCoeff());
            }
        }
    }
    return defect;
}

}  // namespace rrde
