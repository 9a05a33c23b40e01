#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "substatic/numerics.hpp"
#include "substatic/radial.hpp"

using namespace substatic;
using namespace substatic::radial;
using geometry::flat_exterior_profile;
using geometry::reissner_nordstrom_profile;
using geometry::schwarzschild_profile;

namespace {

double max_schwarzschild_error(int n, double m, double r_hi)
{
    const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(n), m));
    double worst = 0;
    for (double x : geometric_offsets(1e-10, r_hi / tr.r0() - 1.0, 2000)) {
        const double r = tr.r0() * (1 + x);
        const double exact = std::sqrt(1.0 - 2.0 * m * std::pow(r, 2.0 - n));
        worst = std::max(worst, std::abs(tr.u(r) - exact));
    }
    return worst;
}

} // namespace

TEST(Schwarzschild, ClosedFormN3)
{
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_LT(max_schwarzschild_error(3, 1.0, 1e3), 1e-8);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);
}

TEST(Schwarzschild, ClosedFormHigherDimensions)
{
    EXPECT_LT(max_schwarzschild_error(4, 0.5, 1e3), 1e-8);
    EXPECT_LT(max_schwarzschild_error(5, 0.5, 1e3), 1e-8);
}

TEST(Schwarzschild, CapacityEqualsMass)
{
    for (auto [n, m] : {std::pair{3, 1.0}, {4, 0.5}, {5, 0.5}, {3, 2.5}}) {
        const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(n), m));
        const auto c = capacity(tr);
        EXPECT_NEAR(tr.capacity(), m, 1e-6 * m) << "n=" << n;
        EXPECT_LT(c.max_rel_spread, 1e-4);
        EXPECT_FALSE(c.inconsistent);
    }
}

TEST(Schwarzschild, FarFieldKeepsRelativeAccuracy)
{
    // 1 - u = 1 - sqrt(1 - 2/r) = (2/r) / (1 + sqrt(1 - 2/r))
    const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(3), 1.0));
    for (double r : {1e2, 1e3, 1e5, 1e8}) {
        const double exact = (2.0 / r) / (1.0 + std::sqrt(1.0 - 2.0 / r));
        EXPECT_NEAR(tr.one_minus_u(r) / exact, 1.0, 1e-9) << r;
    }
}

TEST(FlatExterior, ClosedForm)
{
    const auto tr = solve_radial_potential(flat_exterior_profile(Dimension(3), 1.0));
    EXPECT_NEAR(tr.u(2.0), 0.5, 1e-12);
    EXPECT_NEAR(tr.capacity(), 1.0, 1e-10);
    for (double r : {1.0, 1.5, 10.0, 500.0})
        EXPECT_NEAR(tr.u(r), 1.0 - 1.0 / r, 1e-12);
}

TEST(ReissnerNordstrom, FluxConstantOracle)
{
    // 1 / int_{r0}^inf f^{-1/2} s^{-2} ds at 30 digits.
    const auto tr = solve_radial_potential(reissner_nordstrom_profile(Dimension(3), 1.0, 0.3));
    EXPECT_NEAR(tr.flux_constant(), 0.969243937786684487, 1e-10);
    EXPECT_NEAR(tr.r0(), 1.95393920141694565, 1e-12);
    EXPECT_LT(capacity(tr).max_rel_spread, 1e-4);
}

TEST(Properties, MonotoneAndBounded)
{
    const auto tr = solve_radial_potential(reissner_nordstrom_profile(Dimension(4), 1.0, 0.5));
    const auto u = tr.node_u();
    EXPECT_EQ(u.front(), 0.0);
    for (std::size_t k = 1; k < u.size(); ++k)
        EXPECT_GT(u[k], u[k - 1]);
    EXPECT_LT(u.back(), 1.0);
}

TEST(Properties, LevelRadiusInvertsPotential)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lr(std::log(1e-6), std::log(1e3));
    for (const auto& p : {schwarzschild_profile(Dimension(3), 1.0), reissner_nordstrom_profile(Dimension(3), 1.0, 0.3),
                          flat_exterior_profile(Dimension(5), 2.0)}) {
        const auto tr = solve_radial_potential(p);
        for (int i = 0; i < 40; ++i) {
            const double r = tr.r0() * (1 + std::exp(lr(rng)));
            const auto [u, v] = tr.eval(r);
            EXPECT_NEAR(tr.radius_at_level(u, v) / r, 1.0, 1e-9) << p.label() << " r=" << r;
        }
    }
}

TEST(Properties, LevelBeyondTableUsesTail)
{
    const auto tr = solve_radial_potential(flat_exterior_profile(Dimension(3), 1.0));
    EXPECT_NEAR(tr.radius_at_level(1.0 - 1.0 / 5000.0, 1.0 / 5000.0), 5000.0, 1e-6);
}

TEST(Properties, InterpolantAgreesWithQuadrature)
{
    const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(3), 1.0));
    for (double r : {2.5, 7.0, 90.0})
        EXPECT_NEAR(tr.u_interpolated(r), tr.u(r), 1e-6);
}

TEST(Errors, DomainAndParameters)
{
    const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(3), 1.0));
    EXPECT_THROW(tr.u(1.0), Error);
    EXPECT_THROW(tr.radius_at_level(1.5), Error);
    EXPECT_THROW(solve_radial_potential(schwarzschild_profile(Dimension(3), 1.0), 10.0), Error);
}

TEST(Asymptotics, ExpansionResidualsDecay)
{
    const auto tr = solve_radial_potential(schwarzschild_profile(Dimension(3), 1.0));
    const std::vector<double> radii{10, 100, 1000, 10000};
    const auto rep = asymptotic_expansion_check(tr, radii);
    EXPECT_TRUE(rep.decaying);
    // 1 - u = m/r + m^2/(2 r^2) + ..., so r(1-u) - m ~ m^2/(2r).
    EXPECT_NEAR(rep.samples.front().value_residual, 0.05, 0.01);
    EXPECT_GT(rep.hessian_coefficient_fit, 0.0);
}
