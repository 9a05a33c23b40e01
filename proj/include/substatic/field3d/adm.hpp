#pragma once

// Mass of g0 = w^4 delta on coordinate spheres.
//
// Flux form:  m(r) = 1/(16 pi) int (d_j g_ij - d_i g_jj) nu^i dsigma_e
//                  = -1/(2 pi) int w^3 d_nu w dsigma_e.
// Ricci form: m_I(r) = -1/(8 pi) int G(X, nu_g) dsigma_g with X = x^i d_i.
// For harmonic w the scalar curvature vanishes and
//   Ric_ij = -2 w_ij / w + 6 w_i w_j / w^2 - 2 |dw|^2 / w^2 delta_ij.
// On one center m(r) = m (1 + m/2r)^3 while m_I(r) = m exactly.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/field3d/conformal_factor.hpp"
#include "substatic/field3d/solver.hpp"
#include "substatic/numerics.hpp"

namespace substatic::field3d {

struct MassEstimate {
    double r = 0;
    double m_flux = 0;
    double m_ricci = 0;
    double flux_error = 0;   // twice the 1/r Richardson tail from the neighbouring radius
    double ricci_error = 0;
};

struct MassReport {
    std::vector<MassEstimate> estimates;
    double flux_limit = 0;   // Richardson extrapolation from the two largest radii
    double ricci_limit = 0;
    bool agree = false;      // flux and Ricci agree within combined bars at the two largest radii
};

namespace detail {

template <class F>
double sphere_quadrature(double r, F&& integrand)
{
    constexpr int nt = 32, np = 64;
    double total = 0;
    // Gauss-Legendre in cos(theta) via Golub-Welsch would be overkill; reuse Newton.
    static const auto nodes = [] {
        std::vector<std::pair<double, double>> v;
        for (int i = 0; i < nt; ++i) {
            double x = std::cos(pi * (i + 0.75) / (nt + 0.5)), dp = 1;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = x;
                for (int k = 2; k <= nt; ++k) {
                    const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nt * (x * p1 - p0) / (x * x - 1);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            v.emplace_back(x, 2.0 / ((1 - x * x) * dp * dp));
        }
        return v;
    }();
    for (const auto& [ct, wt] : nodes) {
        const double st = std::sqrt(1 - ct * ct);
        for (int j = 0; j < np; ++j) {
            const double ph = 2.0 * pi * (j + 0.5) / np;
            const Point3 nu{st * std::cos(ph), st * std::sin(ph), ct};
            total += wt * (2.0 * pi / np) * r * r * integrand(Point3{r * nu[0], r * nu[1], r * nu[2]}, nu);
        }
    }
    return total;
}

} // namespace detail

inline double mass_flux(const ConformalFactorSpec& spec, double r)
{
    return -detail::sphere_quadrature(r, [&](const Point3& x, const Point3& nu) {
               const double w = spec.w(x);
               return w * w * w * dot(spec.grad_w(x), nu);
           }) / (2.0 * pi);
}

inline double mass_ricci(const ConformalFactorSpec& spec, double r)
{
    return -detail::sphere_quadrature(r, [&](const Point3& x, const Point3& nu) {
               const double w = spec.w(x);
               const Point3 g = spec.grad_w(x);
               const Mat3 H = spec.hess_w(x);
               const double g2 = dot(g, g);
               // Ric(X, nu_e) with X = x; nu_g = w^{-2} nu_e, dsigma_g = w^4 dsigma_e.
               double ric = 0;
               for (int a = 0; a < 3; ++a)
                   for (int b = 0; b < 3; ++b) {
                       const double Rab = -2.0 * H[a][b] / w + 6.0 * g[a] * g[b] / (w * w) -
                                          (a == b ? 2.0 * g2 / (w * w) : 0.0);
                       ric += Rab * x[a] * nu[b];
                   }
               return ric * w * w;
           }) / (8.0 * pi);
}

inline MassReport adm_mass(const ConformalFactorSpec& spec, std::span<const double> radii)
{
    spec.validate();
    require(!radii.empty(), ErrorKind::invalid_parameter, "no radii given");
    double reach = 0;
    for (const auto& e : spec.excisions)
        reach = std::max(reach, norm(e.center) + e.radius);
    std::vector<double> rs(radii.begin(), radii.end());
    std::sort(rs.begin(), rs.end());
    MassReport rep;
    for (double r : rs) {
        require(r > reach, ErrorKind::invalid_parameter, "sphere must enclose every excision");
        rep.estimates.push_back({r, mass_flux(spec, r), mass_ricci(spec, r), 0, 0});
    }
    auto& E = rep.estimates;
    const double eps = 1e-12;
    for (std::size_t k = 0; k < E.size(); ++k) {
        if (E.size() < 2)
            break;
        const std::size_t a = k == 0 ? 0 : k - 1, b = k == 0 ? 1 : k;
        const double scale = E[a].r / (E[b].r - E[a].r) * E[b].r / E[k].r;
        E[k].flux_error = 2.0 * std::abs(E[b].m_flux - E[a].m_flux) * scale + eps;
        E[k].ricci_error = 2.0 * std::abs(E[b].m_ricci - E[a].m_ricci) * scale + eps;
    }
    if (E.size() >= 2) {
        const auto &p = E[E.size() - 2], &q = E.back();
        rep.flux_limit = (q.r * q.m_flux - p.r * p.m_flux) / (q.r - p.r);
        rep.ricci_limit = (q.r * q.m_ricci - p.r * p.m_ricci) / (q.r - p.r);
        rep.agree = true;
        for (const auto* e : {&p, &q})
            rep.agree = rep.agree && std::abs(e->m_flux - e->m_ricci) <= e->flux_error + e->ricci_error;
    } else {
        rep.flux_limit = E[0].m_flux;
        rep.ricci_limit = E[0].m_ricci;
        rep.agree = std::abs(E[0].m_flux - E[0].m_ricci) <= 1e-12;
    }
    return rep;
}

// Same, with the radii checked against the grid the field lives on.
inline MassReport adm_mass(const ScalarField3D& field, std::span<const double> radii)
{
    const Grid& G = field.grid();
    for (double r : radii)
        require(r <= G.L - 2.0 * G.h, ErrorKind::truncation, "sphere leaves the grid");
    return adm_mass(field.spec(), radii);
}

} // namespace substatic::field3d
