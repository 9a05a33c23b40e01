#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "substatic/field3d.hpp"

using namespace substatic;
using namespace substatic::field3d;

namespace {

const ScalarField3D& single48()
{
    static const auto f = solve_field(single_center(1.0), {48, 4.0}, {});
    return f;
}

const ScalarField3D& flat48()
{
    static const auto f = solve_field(flat_excision(1.0), {48, 4.0}, {});
    return f;
}

const ScalarField3D& two_center81()
{
    static const auto f = solve_field(two_center(0.5, 0.5, 4.0, 0.25), {81, 5.0}, {});
    return f;
}

// Isotropic Schwarzschild: u = sqrt(1 - 2m/r) in the coordinate |x|.
double isotropic_u(double m, double rho) { return (1 - m / (2 * rho)) / (1 + m / (2 * rho)); }

} // namespace

TEST(ConformalFactor, DerivativesMatchFiniteDifferences)
{
    const auto s = two_center(0.7, 0.3, 3.0, 0.2);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> c(-3.0, 3.0);
    const double h = 1e-5;
    for (int k = 0; k < 30; ++k) {
        const Point3 x{c(rng), c(rng), c(rng)};
        const auto g = s.grad_w(x);
        const auto H = s.hess_w(x);
        for (int a = 0; a < 3; ++a) {
            Point3 p = x, q = x;
            p[a] += h;
            q[a] -= h;
            EXPECT_NEAR(g[a], (s.w(p) - s.w(q)) / (2 * h), 1e-6 * (1 + std::abs(g[a])));
            const auto gp = s.grad_w(p), gq = s.grad_w(q);
            for (int b = 0; b < 3; ++b)
                EXPECT_NEAR(H[a][b], (gp[b] - gq[b]) / (2 * h), 1e-5 * (1 + std::abs(H[a][b])));
        }
    }
    EXPECT_DOUBLE_EQ(s.total_mass(), 1.0);
}

TEST(ConformalFactor, Validation)
{
    ConformalFactorSpec bad{{{0, 0, 0}}, {-1.0}, {{{0, 0, 0}, 0.5}}};
    EXPECT_THROW(bad.validate(), Error);
    ConformalFactorSpec unexcised{{{0, 0, 0}}, {1.0}, {}};
    EXPECT_THROW(unexcised.validate(), Error);
}

TEST(Solver, FlatCapacityMatchesRadius)
{
    EXPECT_NEAR(flat48().capacity(), 1.0, 0.01);
    for (double r : {1.5, 2.0, 3.0}) {
        const double u = flat48().interpolate({r, 0, 0});
        EXPECT_NEAR(u, 1 - 1 / r, 5e-3);
    }
}

TEST(Solver, SingleCenterMatchesIsotropicSchwarzschild)
{
    const auto& F = single48();
    EXPECT_NEAR(F.capacity(), 1.0, 0.02);
    const auto& G = F.grid();
    double worst = 0;
    for (int i = 0; i < G.n; ++i)
        for (int j = 0; j < G.n; ++j)
            for (int k = 0; k < G.n; ++k)
                if (F.kind(i, j, k) == NodeKind::active)
                    worst = std::max(worst, std::abs(F.at(i, j, k) - isotropic_u(1.0, norm(G.point(i, j, k)))));
    EXPECT_LT(worst, 0.02);
}

TEST(Solver, ConvergenceOrderUnderRefinement)
{
    const auto coarse = solve_field(single_center(1.0), {32, 4.0}, {});
    const double e1 = std::abs(coarse.capacity() - 1.0), e2 = std::abs(single48().capacity() - 1.0);
    // Second order would give (47/31)^2 = 2.3.
    EXPECT_GT(e1 / e2, 1.5);
}

TEST(Solver, ResidualAndHistory)
{
    const auto& F = single48();
    EXPECT_LT(F.residual_norm(), F.tol() * (1 + std::abs(F.closure_constant())));
    const auto& h = F.residual_history();
    ASSERT_GT(h.size(), 2u);
    for (std::size_t k = 1; k < h.size(); ++k)
        EXPECT_LE(h[k], h[k - 1] * (1 + 1e-12));
}

TEST(Solver, MaximumPrinciple)
{
    for (const ScalarField3D* F : {&single48(), &flat48()})
        for (double v : F->values()) {
            EXPECT_GE(v, -1e-12);
            EXPECT_LT(v, 1.0);
        }
}

TEST(Solver, BoxFluxIsConserved)
{
    const auto& F = single48();
    const int n = F.grid().n;
    const double a = F.box_flux(8, n - 9), b = F.box_flux(12, n - 13), c = F.box_flux(6, n - 7);
    EXPECT_NEAR(a, b, 1e-6 * std::abs(a));
    EXPECT_NEAR(a, c, 1e-6 * std::abs(a));
    EXPECT_NEAR(a / (4 * pi), F.capacity(), 1e-6);
}

TEST(Solver, RejectsExcisionAtBoundary)
{
    try {
        solve_field(flat_excision(1.0, {3.8, 0, 0}), {32, 4.0}, {});
        FAIL() << "excision touching the boundary accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_parameter);
    }
}

TEST(Solver, IterationCapRaisesConvergence)
{
    try {
        solve_field(single_center(1.0), {32, 4.0}, {1e-9, 3});
        FAIL() << "three iterations reported convergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::convergence);
    }
}

TEST(LevelSet, SingleCenterSpheres)
{
    const auto& F = single48();
    for (double t : {0.3, 0.5, 0.7}) {
        const auto S = extract_level(F, t);
        // {u = t} is |x| = m(1+t)/(2(1-t)); its g0 area is 4 pi rho^2 w^4.
        const double rho = (1 + t) / (2 * (1 - t));
        const double exact = 4 * pi * rho * rho * std::pow(1 + 1 / (2 * rho), 4);
        EXPECT_NEAR(S.area() / exact, 1.0, 0.01) << t;
        EXPECT_EQ(S.components, 1);
        EXPECT_TRUE(S.closed());
        EXPECT_EQ(S.euler_characteristic[0], 2);
        EXPECT_FALSE(S.near_critical);
    }
}

TEST(LevelSet, ConstancyAndCoarea)
{
    const auto& F = single48();
    const std::vector<double> levels{0.3, 0.5, 0.7};
    for (double beta : {0.5, 1.0, 2.0}) {
        const auto curve = monotonicity_scan(F, beta, levels, 0.03);
        EXPECT_TRUE(curve.theorem_applies);
        EXPECT_LT(curve.relative_spread, 0.03) << beta;
        for (double t : levels)
            EXPECT_NEAR(coarea_integral_F(F, t, beta) / surface_integral_F(F, t, beta), 1.0, 0.02);
    }
}

TEST(LevelSet, TruncatedLevelThrows)
{
    // u = 0.78 at the face centres and 0.86 at the corners.
    try {
        extract_level(single48(), 0.82);
        FAIL() << "level crossing the outer boundary accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::truncation);
    }
    EXPECT_THROW(extract_level(single48(), 0.95), Error);
}

TEST(Critical, SingleCenterHasNone)
{
    EXPECT_TRUE(find_critical_points(single48()).empty());
}

TEST(TwoCenter, SaddleAndTransition)
{
    // Regression fixture at 81^3 over [-5, 5]^3.
    const auto& F = two_center81();
    EXPECT_NEAR(F.capacity(), 0.9449, 2e-3);
    const auto cps = find_critical_points(F);
    ASSERT_EQ(cps.size(), 1u);
    const auto& cp = cps[0];
    EXPECT_TRUE(cp.saddle);
    EXPECT_EQ(cp.index, 1);
    EXPECT_NEAR(cp.value, 0.622298, 1e-4);
    EXPECT_LT(norm(cp.x), 2 * F.grid().h);
    EXPECT_EQ(extract_level(F, cp.value - 0.02).components, 2);
    EXPECT_EQ(extract_level(F, cp.value + 0.02).components, 1);
}

TEST(TwoCenter, PenroseNeedsConnectedBoundary)
{
    try {
        penrose_check(two_center81());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unsupported_configuration);
    }
}

TEST(Penrose, GridSingleCenterNearEquality)
{
    const auto p = penrose_check(single48());
    EXPECT_LT(std::abs(p.margin), 0.02);
}

TEST(Adm, SingleCenterClosedForms)
{
    const auto s = single_center(1.0);
    for (double r : {5.0, 20.0, 100.0}) {
        EXPECT_NEAR(mass_flux(s, r), std::pow(1 + 0.5 / r, 3), 1e-10);
        EXPECT_NEAR(mass_ricci(s, r), 1.0, 1e-10);
    }
    const std::vector<double> radii{50, 100, 200, 400};
    const auto rep = adm_mass(s, radii);
    EXPECT_NEAR(rep.estimates.back().m_flux, 1.0, 0.02);
    EXPECT_NEAR(rep.flux_limit, 1.0, 1e-3);
    EXPECT_TRUE(rep.agree);
}

TEST(Adm, TwoCenterRicciGivesTotalMass)
{
    const auto s = two_center(0.5, 0.5, 4.0, 0.25);
    EXPECT_NEAR(mass_ricci(s, 50.0), 1.0, 1e-6);
}

TEST(Adm, FlatIsMassless)
{
    const auto s = flat_excision(1.0);
    EXPECT_EQ(mass_flux(s, 10.0), 0.0);
    EXPECT_EQ(mass_ricci(s, 10.0), 0.0);
}

TEST(Adm, RadiiMustEncloseAndStayOnGrid)
{
    const std::vector<double> inside{0.3};
    EXPECT_THROW(adm_mass(single_center(1.0), inside), Error);
    const std::vector<double> outside{10.0};
    EXPECT_THROW(adm_mass(single48(), outside), Error);
}

TEST(Snapshot, RoundTrip)
{
    const auto path = std::filesystem::temp_directory_path() / "substatic_roundtrip.grid";
    write_snapshot(flat48(), path.string());
    const auto back = read_snapshot(path.string());
    EXPECT_EQ(back.grid().n, flat48().grid().n);
    EXPECT_EQ(back.values(), flat48().values());
    ASSERT_EQ(back.spec().excisions.size(), 1u);
    EXPECT_EQ(back.spec().excisions[0].radius, 1.0);
    std::filesystem::remove(path);
    EXPECT_THROW(read_snapshot(path.string()), Error);
}
