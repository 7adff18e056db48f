#include "oracles.hpp"
#include "random_paths.hpp"

#include <gtest/gtest.h>

using namespace rrde;
using rrde::testing::random_grid;
using rrde::testing::random_path;
using rrde::testing::random_walk;
using rrde::testing::rel_diff;

namespace {

GridPath unit_steps(std::vector<double> v)
{
    std::vector<double> t(v.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return GridPath::scalar(TimeGrid(t), v);
}

GridPath zeros(const TimeGrid& g, std::size_t n)
{
    return GridPath::constant(g, Vector::Zero(static_cast<Eigen::Index>(n)));
}

GridPath brownian(const TimeGrid& g, std::size_t dim, std::uint64_t seed, double vol)
{
    GeneratorSpec s;
    s.kind = GeneratorKind::Brownian;
    s.dim = dim;
    s.seed = seed;
    s.volatility = vol;
    return generate(s, g);
}

Matrix square(std::mt19937_64& gen, std::size_t d, double range)
{
    return random_path(gen, TimeGrid::uniform(1.0, std::max<std::size_t>(d, 2)), d, range)
        .values()
        .leftCols(static_cast<Eigen::Index>(d));
}

std::vector<Matrix> random_blocks(std::mt19937_64& gen, std::size_t count, std::size_t d, double range)
{
    std::vector<Matrix> out;
    for (std::size_t j = 0; j < count; ++j) out.push_back(square(gen, d, range));
    return out;
}

double sup_diff(const GridPath& a, const GridPath& b)
{
    return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

// A scalar field without a declared third derivative.
VectorField field_without_third()
{
    return VectorField(
        "no_third", 1, 1, [](const Vector&) { return Matrix::Ones(1, 1); },
        [](const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; },
        [](const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; }, std::nullopt,
        FieldBounds{1.0, 0.0, 0.0, 0.0}, true);
}

}  // namespace

TEST(Lift, ThreePointExample)
{
    const Level2RoughPath x = Level2RoughPath::left_point_lift(unit_steps({0, 1, 2}));
    ASSERT_EQ(x.prefix().size(), 3u);
    EXPECT_EQ(x.prefix()[0](0, 0), 0.0);
    EXPECT_EQ(x.prefix()[1](0, 0), 0.0);
    EXPECT_EQ(x.prefix()[2](0, 0), 1.0);
    EXPECT_EQ(x.area(1, 2)(0, 0), 0.0);
    EXPECT_EQ(x.chen_lookup(1.0, 2.0)(0, 0), 0.0);
    EXPECT_EQ(x.chen_lookup(0.0, 2.0)(0, 0), oracle::direct_area(x.path(), 0, 2)(0, 0));
}

TEST(Lift, ConstantPathHasZeroArea)
{
    const GridPath c = GridPath::constant(TimeGrid::uniform(1.0, 7), Vector::Constant(2, 3.0));
    const Level2RoughPath x = Level2RoughPath::left_point_lift(c);
    for (const Matrix& m : x.prefix()) EXPECT_TRUE(m.isZero(0.0));
}

TEST(Lift, DiagonalLookupVanishes)
{
    std::mt19937_64 gen(41);
    const GridPath p = random_path(gen, random_grid(gen, 8), 2);
    const Level2RoughPath x = Level2RoughPath::from_blocks(p, random_blocks(gen, 7, 2, 1.0));
    for (double t : {0.0, 0.3, 1.0}) {
        EXPECT_TRUE(x.chen_lookup(t, t).isZero(0.0));
    }
    EXPECT_THROW(x.chen_lookup(0.6, 0.5), InputError);
    EXPECT_THROW(x.chen_lookup(0.0, 1.5), InputError);
}

TEST(Lift, Validation)
{
    const GridPath p = unit_steps({0, 1, 2});
    std::vector<Matrix> pref(3, Matrix::Zero(1, 1));
    EXPECT_NO_THROW(Level2RoughPath(p, pref, 2.5));
    EXPECT_THROW(Level2RoughPath(p, pref, 3.0), InputError);
    EXPECT_THROW(Level2RoughPath(p, pref, 1.9), InputError);
    EXPECT_THROW(Level2RoughPath(p, std::vector<Matrix>(2, Matrix::Zero(1, 1)), 2.5), InputError);
    pref[0](0, 0) = 1.0;
    EXPECT_THROW(Level2RoughPath(p, pref, 2.5), InputError);
    EXPECT_THROW(Level2RoughPath::from_blocks(p, {Matrix::Zero(1, 1)}), InputError);
}

TEST(Lift, LeftPointAreaMatchesDirectSum)
{
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 3);
        const GridPath p = random_path(gen, random_grid(gen, 12), d);
        const Level2RoughPath x = Level2RoughPath::left_point_lift(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (std::size_t j = i; j < p.size(); ++j) {
                EXPECT_LE((x.area(i, j) - oracle::direct_area(p, i, j)).cwiseAbs().maxCoeff(), 1e-13);
            }
            if (i + 1 < p.size()) EXPECT_TRUE(x.block(i).isZero(1e-15));
        }
    }
}

TEST(Lift, ChenOnAllTriples)
{
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 3);
        const GridPath p = random_path(gen, random_grid(gen, 15), d);
        const Level2RoughPath lifts[] = {Level2RoughPath::left_point_lift(p),
                                         Level2RoughPath::from_blocks(p, random_blocks(gen, 14, d, 0.5))};
        for (const Level2RoughPath& x : lifts) {
            for (std::size_t s = 0; s < p.size(); ++s) {
                for (std::size_t u = s; u < p.size(); ++u) {
                    for (std::size_t t = u; t < p.size(); ++t) {
                        const Matrix lhs = x.area(s, t) - x.area(s, u) - x.area(u, t);
                        const Matrix rhs = outer(p.node(u) - p.node(s), p.node(t) - p.node(u));
                        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
                    }
                }
            }
        }
    }
}

TEST(Lift, FromBlocksReproducesBlocks)
{
    std::mt19937_64 gen(44);
    const GridPath p = random_path(gen, random_grid(gen, 10), 2);
    const std::vector<Matrix> blocks = random_blocks(gen, 9, 2, 1.0);
    const Level2RoughPath x = Level2RoughPath::from_blocks(p, blocks);
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        EXPECT_LE((x.block(j) - blocks[j]).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Lift, SymmetricPartIdentity)
{
    std::mt19937_64 gen(45);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 3);
        const GridPath p = random_path(gen, random_grid(gen, 10), d);
        const Level2RoughPath x = Level2RoughPath::left_point_lift(p);
        for (std::size_t s = 0; s < p.size(); ++s) {
            for (std::size_t t = s; t < p.size(); ++t) {
                const Vector inc = p.node(t) - p.node(s);
                Matrix jumps = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
                for (std::size_t k = s + 1; k <= t; ++k) {
                    const Vector dx = p.node(k) - p.node(k - 1);
                    jumps += outer(dx, dx);
                }
                const Matrix a = oracle::direct_area(p, s, t);
                EXPECT_LE((a + a.transpose() - (outer(inc, inc) - jumps)).cwiseAbs().maxCoeff(), 1e-12);
                const Matrix b = x.area(s, t);
                EXPECT_LE((b + b.transpose() - (outer(inc, inc) - jumps)).cwiseAbs().maxCoeff(), 1e-12);
            }
        }
    }
}

TEST(Lift, ResampleKeepsAreasBetweenOldNodes)
{
    std::mt19937_64 gen(46);
    const GridPath p = random_path(gen, random_grid(gen, 8), 2);
    const Level2RoughPath x = Level2RoughPath::from_blocks(p, random_blocks(gen, 7, 2, 1.0));
    const TimeGrid fine = merge(p.grid(), TimeGrid::uniform(1.0, 17));
    const Level2RoughPath r = x.resample(fine);
    for (double s : p.grid().times()) {
        for (double t : p.grid().times()) {
            if (s > t) continue;
            EXPECT_LE((r.chen_lookup(s, t) - x.chen_lookup(s, t)).cwiseAbs().maxCoeff(), 1e-13);
        }
    }
    EXPECT_NEAR(rough_seminorm(r), rough_seminorm(x), 1e-12);
}

TEST(TwoParamVariation, Examples)
{
    const Level2RoughPath flat = Level2RoughPath::left_point_lift(unit_steps({1, 1, 1}));
    EXPECT_EQ(two_param_p_variation(flat, 1.25, 0.0, 2.0), 0.0);

    // single interior node: max of |XX_{0,2}| and |XX_{0,1}|^r + |XX_{1,2}|^r
    const Level2RoughPath zero = Level2RoughPath::from_blocks(
        unit_steps({0, 1, 3}), {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, -2.0)});
    const double direct = std::abs(zero.area(0, 2)(0, 0));
    const double split = std::pow(std::pow(std::abs(zero.area(0, 1)(0, 0)), 1.25) +
                                      std::pow(std::abs(zero.area(1, 2)(0, 0)), 1.25),
                                  1 / 1.25);
    EXPECT_DOUBLE_EQ(two_param_p_variation(zero, 1.25, 0.0, 2.0), std::max(direct, split));
    EXPECT_THROW(two_param_p_variation(zero, 0.9, 0.0, 2.0), InputError);
}

TEST(TwoParamVariation, MatchesExhaustiveEnumeration)
{
    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t nodes = 2 + static_cast<std::size_t>(trial % 9);
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 2);
        const GridPath p = random_path(gen, random_grid(gen, nodes), d);
        const Level2RoughPath x = Level2RoughPath::from_blocks(p, random_blocks(gen, nodes - 1, d, 0.5));
        for (double r : {1.0, 1.25, 1.4}) {
            const double brute = oracle::brute_force_variation(
                0, nodes - 1, r, [&x](std::size_t i, std::size_t j) { return x.area(i, j).norm(); });
            EXPECT_LE(rel_diff(two_param_p_variation(x, r, 0.0, 1.0), brute), 1e-12);
        }
    }
}

TEST(RoughIntegral, LeftSumExample)
{
    const GridPath p = unit_steps({0, 1, 2});
    const Level2RoughPath x = Level2RoughPath::left_point_lift(p);
    const ControlledPath y{p, p, std::vector<Matrix>(3, Matrix::Ones(1, 1))};
    const ControlledPath i = rough_integral(y, x);
    EXPECT_EQ(i.y.node(0)(0), 0.0);
    EXPECT_EQ(i.y.node(1)(0), 0.0);
    EXPECT_EQ(i.y.node(2)(0), 1.0);
    // derivative of the integral is the integrand
    EXPECT_EQ(i.yprime[2](0, 0), 2.0);
}

TEST(RoughIntegral, ConstantIntegrand)
{
    std::mt19937_64 gen(48);
    const GridPath p = random_path(gen, random_grid(gen, 9), 2, 1.0, true);
    const Level2RoughPath x = Level2RoughPath::left_point_lift(p);
    Matrix c(3, 2);
    c << 1, 0.5, -2, 0.25, 0, 1;
    const Vector vc = Eigen::Map<const Vector>(c.data(), 6);
    const ControlledPath y{p, GridPath::constant(p.grid(), vc), std::vector<Matrix>(p.size(), Matrix::Zero(6, 2))};
    const ControlledPath i = rough_integral(y, x);
    for (std::size_t j = 0; j < p.size(); ++j) {
        EXPECT_LE((Vector(i.y.node(j)) - c * (p.node(j) - p.node(0))).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(RoughIntegral, JumpIdentity)
{
    std::mt19937_64 gen(49);
    const std::size_t d = 2, n = 2;
    const GridPath p = random_path(gen, random_grid(gen, 10), d);
    const Level2RoughPath x = Level2RoughPath::from_blocks(p, random_blocks(gen, 9, d, 1.0));
    const GridPath vals = random_path(gen, p.grid(), n * d);
    std::vector<Matrix> der;
    for (std::size_t j = 0; j < p.size(); ++j) der.push_back(square(gen, n * d, 1.0).leftCols(2));
    const ControlledPath y{p, vals, der};
    const ControlledPath i = rough_integral(y, x);
    for (std::size_t j = 1; j < p.size(); ++j) {
        const Matrix yj = Eigen::Map<const Matrix>(Vector(vals.node(j - 1)).data(), 2, 2);
        // explicit second-order term: sum_{a,b} Y'(r + n a, b) XX(b, a)
        Vector second = Vector::Zero(2);
        const Matrix blk = x.block(j - 1);
        for (Eigen::Index r = 0; r < 2; ++r)
            for (Eigen::Index a = 0; a < 2; ++a)
                for (Eigen::Index b = 0; b < 2; ++b) second(r) += der[j - 1](r + 2 * a, b) * blk(b, a);
        const Vector expect = yj * (p.node(j) - p.node(j - 1)) + second;
        EXPECT_LE((Vector(i.y.node(j) - i.y.node(j - 1)) - expect).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(RoughIntegral, AdditivityOverAdjacentIntervals)
{
    std::mt19937_64 gen(50);
    const GridPath p = random_path(gen, TimeGrid::uniform(1.0, 13), 1);
    const std::vector<Matrix> blocks = random_blocks(gen, 12, 1, 0.5);
    const Level2RoughPath x = Level2RoughPath::from_blocks(p, blocks);
    const GridPath vals = random_path(gen, p.grid(), 1);
    const GridPath ders = random_path(gen, p.grid(), 1);
    std::vector<Matrix> der;
    for (std::size_t j = 0; j < p.size(); ++j) der.push_back(Matrix(ders.node(j)));
    const ControlledPath whole = rough_integral(ControlledPath{p, vals, der}, x);

    // restart the integral at node u on the shifted sub-grid
    const std::size_t u = 5;
    std::vector<double> t;
    for (std::size_t j = u; j < p.size(); ++j) t.push_back(p.grid()[j] - p.grid()[u]);
    const TimeGrid sub(t);
    const auto len = static_cast<Eigen::Index>(p.size() - u);
    const GridPath ps(sub, p.values().rightCols(len));
    const Level2RoughPath xs = Level2RoughPath::from_blocks(
        ps, std::vector<Matrix>(blocks.begin() + static_cast<long>(u), blocks.end()));
    const ControlledPath part = rough_integral(
        ControlledPath{ps, GridPath(sub, vals.values().rightCols(len)),
                       std::vector<Matrix>(der.begin() + static_cast<long>(u), der.end())},
        xs);
    for (std::size_t j = u; j < p.size(); ++j) {
        EXPECT_NEAR(whole.y.node(j)(0) - whole.y.node(u)(0), part.y.node(j - u)(0), 1e-13);
    }
}

TEST(RoughIntegral, RejectsMismatchedReference)
{
    const GridPath p = unit_steps({0, 1, 2});
    const Level2RoughPath x = Level2RoughPath::left_point_lift(p);
    const ControlledPath y{unit_steps({0, 1, 3}), p, std::vector<Matrix>(3, Matrix::Ones(1, 1))};
    EXPECT_THROW(rough_integral(y, x), InputError);
    const ControlledPath bad{p, p, std::vector<Matrix>(2, Matrix::Ones(1, 1))};
    EXPECT_THROW(bad.validate(), InputError);
}

TEST(Remainder, Examples)
{
    std::mt19937_64 gen(51);
    const GridPath p = random_path(gen, random_grid(gen, 9), 2);
    const ControlledPath same{p, p, std::vector<Matrix>(p.size(), Matrix::Identity(2, 2))};
    const ControlledPath flat{p, p, std::vector<Matrix>(p.size(), Matrix::Zero(2, 2))};
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i; j < p.size(); ++j) {
            EXPECT_TRUE(remainder_nodes(same, i, j).isZero(0.0));
            EXPECT_EQ(remainder_nodes(flat, i, j), Vector(p.node(j) - p.node(i)));
        }
    }
    EXPECT_EQ(remainder_variation(same, 1.25), 0.0);
    EXPECT_EQ(remainder(flat, 0.0, 1.0), Vector(p.node(p.size() - 1) - p.node(0)));
}

TEST(Remainder, TaylorBoundForSmoothFunctions)
{
    for (std::size_t nodes : {51u, 201u, 801u}) {
        const TimeGrid g = TimeGrid::uniform(1.0, nodes);
        const GridPath x = brownian(g, 1, 7, 1.0);
        Matrix yv(1, static_cast<Eigen::Index>(nodes));
        std::vector<Matrix> der;
        for (std::size_t j = 0; j < nodes; ++j) {
            yv(0, static_cast<Eigen::Index>(j)) = std::sin(x.node(j)(0));
            der.push_back(Matrix::Constant(1, 1, std::cos(x.node(j)(0))));
        }
        const ControlledPath c{x, GridPath(g, yv), der};
        for (std::size_t i = 0; i < nodes; i += 7) {
            for (std::size_t j = i; j < nodes; j += 5) {
                const double dx = x.node(j)(0) - x.node(i)(0);
                EXPECT_LE(std::abs(remainder_nodes(c, i, j)(0)), 0.5 * dx * dx + 1e-15);
            }
        }
        EXPECT_TRUE(std::isfinite(remainder_variation(c, 1.25)));
        EXPECT_LE(remainder_variation(c, 1.25), 0.5 * std::pow(p_variation(x, 2.5), 2) + 1e-12);
    }
}

TEST(ControlledNorm, HandExample)
{
    const GridPath p = unit_steps({0, 1, 3});
    const ControlledPath c{p, unit_steps({1, 2, 2}),
                           {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 0.0)}};
    // Y_0 = 1, Y'_0 = 1, ||Y'||_p = 1, remainder is zero except R_{1,2} = 0 and R_{0,2} = 1 - 3 = -2
    const double r = remainder_variation(c, 1.25);
    EXPECT_DOUBLE_EQ(r, std::abs(remainder_nodes(c, 0, 2)(0)));
    EXPECT_DOUBLE_EQ(controlled_norm(c, 2.5), 1.0 + 1.0 + 1.0 + r);
}

TEST(ComposeControlled, ConstantAndIdentityFields)
{
    std::mt19937_64 gen(52);
    const GridPath p = random_path(gen, random_grid(gen, 7), 2);
    const GridPath y = random_path(gen, p.grid(), 2);
    std::vector<Matrix> der;
    for (std::size_t j = 0; j < p.size(); ++j) der.push_back(square(gen, 2, 1.0));
    const ControlledPath c{p, y, der};

    Matrix cmat(2, 1);
    cmat << 0.5, -1;
    const ControlledPath k = compose_controlled(constant_field(cmat), c);
    for (std::size_t j = 0; j < p.size(); ++j) {
        EXPECT_EQ(Vector(k.y.node(j)), Vector(cmat.reshaped()));
        EXPECT_TRUE(k.yprime[j].isZero(0.0));
    }

    std::vector<Matrix> slopes{Matrix::Zero(2, 1), Matrix::Zero(2, 1)};
    slopes[0](0, 0) = 1.0;
    slopes[1](1, 0) = 1.0;
    const ControlledPath id = compose_controlled(linear_field(Matrix::Zero(2, 1), slopes), c);
    for (std::size_t j = 0; j < p.size(); ++j) {
        EXPECT_EQ(Vector(id.y.node(j)), Vector(y.node(j)));
        EXPECT_EQ(id.yprime[j], der[j]);
    }
    EXPECT_THROW(compose_controlled(field_without_third(), ControlledPath{p.resample(p.grid()), zeros(p.grid(), 1),
                                                                          std::vector<Matrix>(p.size(), Matrix::Zero(1, 2))}),
                 InputError);
}

TEST(ComposeControlled, GubinelliDerivativeByFiniteDifferences)
{
    // Y = X (1-d driver, state dim 2 through a fixed direction); f(Y)_{s,t} - Df(Y_s)Y'_s X_{s,t}
    // is second order in |X_{s,t}| for the tanh field
    const VectorField f = standard_field("tanh", 2, 1);
    Vector dir(2);
    dir << 0.6, -0.8;
    for (double h : {1e-2, 1e-3}) {
        const GridPath x = GridPath::scalar(TimeGrid({0.0, 1.0}), std::vector<double>{0.0, h});
        Matrix yv(2, 2);
        yv.col(0) = Vector::Constant(2, 0.3);
        yv.col(1) = yv.col(0) + dir * h;
        const ControlledPath c{x, GridPath(x.grid(), yv), std::vector<Matrix>(2, Matrix(dir))};
        const ControlledPath fc = compose_controlled(f, c);
        const double r = remainder_nodes(fc, 0, 1).norm();
        EXPECT_LE(r, 2.0 * h * h);
    }
}

TEST(RdeConfig, Validation)
{
    RdeSolveConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_DOUBLE_EQ(c.effective_q(), 2.75);
    c.p = 3.0;
    EXPECT_THROW(c.validate(), InputError);
    c.p = 2.5;
    c.q = 2.4;
    EXPECT_THROW(c.validate(), InputError);
    c.q = 2.9;
    c.theta = 0.0;
    EXPECT_THROW(c.validate(), InputError);
    c.theta = 1.5;
    EXPECT_THROW(c.validate(), InputError);
}

TEST(RdeSolver, ZeroFieldIsSkorokhod)
{
    std::mt19937_64 gen(53);
    const TimeGrid g = TimeGrid::uniform(1.0, 51);
    const Level2RoughPath x = Level2RoughPath::from_blocks(brownian(g, 2, 3, 1.0), random_blocks(gen, 50, 2, 0.1));
    const GridPath l = random_walk(gen, g, 2, 0.1);
    const Vector y0 = Vector::Constant(2, 0.5);
    const RdeSolution s = solve_reflected_rde(constant_field(Matrix::Zero(2, 2)), y0, x, l, RdeSolveConfig{});
    ASSERT_TRUE(s.report.converged);
    const SkorokhodSolution ref = skorokhod_solve(GridPath::constant(g, y0), l);
    EXPECT_EQ(s.y.values(), ref.z.values());
    EXPECT_EQ(s.k.values(), ref.k.values());
}

TEST(RdeSolver, MatchesYoungSolverOnFiniteVariationDrivers)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 201);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        GeneratorSpec cp;
        cp.kind = GeneratorKind::CompoundPoisson;
        cp.rate = 5.0;
        cp.seed = seed;
        GeneratorSpec sm;
        sm.kind = GeneratorKind::SmoothSine;
        sm.amplitude = 0.5;
        const GridPath a = generate(cp, g) + generate(sm, g);
        GeneratorSpec bar;
        bar.kind = GeneratorKind::SmoothSine;
        bar.start = Vector::Constant(1, -0.2);
        bar.amplitude = 0.3;
        bar.frequency = 2.0;
        const GridPath l = generate(bar, g);
        const VectorField f = standard_field("tanh", 1, 1);
        const Vector y0 = Vector::Constant(1, 0.2);
        YoungSolveConfig yc;
        yc.p = 2.0;
        yc.q = 1.0;
        const YoungSolution ys = solve_reflected_young(f, y0, a, zeros(g, 1), l, yc);
        const RdeSolution rs = solve_reflected_rde(f, y0, Level2RoughPath::left_point_lift(a), l, RdeSolveConfig{});
        ASSERT_TRUE(ys.report.converged && rs.report.converged);
        EXPECT_LE(sup_diff(ys.y, rs.y), 1e-8);
        EXPECT_LE(sup_diff(ys.k, rs.k), 1e-8);
    }
}

TEST(RdeSolver, MatchesNodeRecursionWithAreas)
{
    std::mt19937_64 gen(54);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 2);
        const std::size_t d = 1 + static_cast<std::size_t>(trial / 3);
        const TimeGrid g = TimeGrid::uniform(1.0, 151);
        const Level2RoughPath x =
            Level2RoughPath::from_blocks(brownian(g, d, 10 + static_cast<std::uint64_t>(trial), 0.8),
                                         random_blocks(gen, 150, d, 0.01));
        const GridPath l = random_walk(gen, g, n, 0.03);
        const VectorField f = standard_field("tanh_lower", n, d);
        const Vector y0 = Vector::Constant(static_cast<Eigen::Index>(n), 0.1);
        const RdeSolution s = solve_reflected_rde(f, y0, x, l, RdeSolveConfig{});
        ASSERT_TRUE(s.report.converged);
        const oracle::ReflectedPair ref = oracle::rough_recursion(f, y0, x, l);
        EXPECT_LE((s.y.values() - ref.y).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_LE((s.k.values() - ref.k).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_LE(rde_equation_residual(f, y0, x, s.y, s.k), 1e-10);
        EXPECT_TRUE(skorokhod_verify({s.y, s.k}, s.y - s.k, l, default_skorokhod_tolerance(s.k)).ok());
        // Y' = f(Y)
        for (std::size_t j = 0; j < g.size(); ++j) {
            const Matrix fy = f(s.y.node(j));
            EXPECT_EQ(Vector(s.yprime.node(j)), Vector(fy.reshaped()));
        }
    }
}

TEST(RdeSolver, EngineeredJumpFollowsFormula)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 101);
    const std::size_t star = 40;
    const VectorField f = standard_field("tanh", 1, 2);
    Matrix xv = brownian(g, 2, 77, 0.3).values();
    for (Eigen::Index j = static_cast<Eigen::Index>(star); j < xv.cols(); ++j) {
        xv(0, j) -= 3.0;
        xv(1, j) += 1.0;
    }
    const GridPath path(g, xv);
    std::vector<Matrix> blocks(100, Matrix::Zero(2, 2));
    blocks[star - 1] << 0.5, -2.0, 1.5, 0.25;
    const Level2RoughPath x = Level2RoughPath::from_blocks(path, blocks);
    const GridPath l = zeros(g, 1);
    const Vector y0 = Vector::Constant(1, 0.4);
    const RdeSolution s = solve_reflected_rde(f, y0, x, l, RdeSolveConfig{});
    ASSERT_TRUE(s.report.converged);

    const Vector y_minus = s.y.node(star - 1);
    const double formula = std::max(
        0.0, (l.node(star) - y_minus - f(y_minus) * (path.node(star) - path.node(star - 1)) -
              f.compensation(y_minus, x.block(star - 1)))(0));
    EXPECT_GT(formula, 0.0);
    EXPECT_EQ(s.k.node(star)(0) - s.k.node(star - 1)(0), formula);
    bool recorded = false;
    for (const JumpRecord& jr : s.report.jumps) {
        if (jr.node == star) {
            recorded = true;
            EXPECT_EQ(jr.delta_k(0), formula);
        }
    }
    EXPECT_TRUE(recorded);
    // pushed onto the barrier exactly, so the next window adds nothing at the node
    EXPECT_EQ(s.y.node(star)(0), l.node(star)(0));
}

TEST(RdeSolver, PicardStartsAgreeInOneDimension)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 301);
    const VectorField f = standard_field("tanh", 1, 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Level2RoughPath x = Level2RoughPath::left_point_lift(brownian(g, 1, seed, 1.0));
        RdeSolveConfig c;
        c.start = PicardStart::Constant;
        const RdeSolution a = solve_reflected_rde(f, Vector::Constant(1, 0.1), x, zeros(g, 1), c);
        c.start = PicardStart::Unreflected;
        const RdeSolution b = solve_reflected_rde(f, Vector::Constant(1, 0.1), x, zeros(g, 1), c);
        ASSERT_TRUE(a.report.converged && b.report.converged);
        EXPECT_LE(sup_diff(a.y, b.y), 1e-10);
        EXPECT_LE(sup_diff(a.k, b.k), 1e-10);
        EXPECT_FALSE(a.report.non_unique_risk);
    }
}

TEST(RdeSolver, NonUniquenessFlag)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 21);
    const Level2RoughPath x = Level2RoughPath::left_point_lift(brownian(g, 2, 1, 0.5));
    const Vector y0 = Vector::Constant(2, 0.1);
    const RdeSolution full = solve_reflected_rde(standard_field("tanh", 2, 2), y0, x, zeros(g, 2), RdeSolveConfig{});
    const RdeSolution lower =
        solve_reflected_rde(standard_field("tanh_lower", 2, 2), y0, x, zeros(g, 2), RdeSolveConfig{});
    EXPECT_TRUE(full.report.non_unique_risk);
    EXPECT_FALSE(lower.report.non_unique_risk);
}

TEST(RdeSolver, InputErrors)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 5);
    const Level2RoughPath x = Level2RoughPath::left_point_lift(zeros(g, 1));
    EXPECT_THROW(solve_reflected_rde(field_without_third(), Vector::Zero(1), x, zeros(g, 1), RdeSolveConfig{}),
                 InputError);
    EXPECT_THROW(solve_reflected_rde(standard_field("tanh", 1, 1), Vector::Constant(1, -1.0), x, zeros(g, 1),
                                     RdeSolveConfig{}),
                 InputError);
    EXPECT_THROW(solve_reflected_rde(standard_field("tanh", 1, 2), Vector::Zero(1), x, zeros(g, 1), RdeSolveConfig{}),
                 InputError);
}

TEST(RdeSolver, MaxIterationsReported)
{
    const TimeGrid g = TimeGrid::uniform(1.0, 101);
    RdeSolveConfig c;
    c.max_iter = 1;
    const RdeSolution s = solve_reflected_rde(standard_field("tanh", 1, 1), Vector::Constant(1, 0.1),
                                              Level2RoughPath::left_point_lift(brownian(g, 1, 2, 1.0)), zeros(g, 1), c);
    EXPECT_FALSE(s.report.converged);
    ASSERT_TRUE(s.report.failure.has_value());
    EXPECT_EQ(s.report.failure->kind, FailureKind::MaxIterations);
}
