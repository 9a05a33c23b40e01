#pragma once

// Cylindrical conformal picture g = (1-u^2)^{2/(n-2)} g0, phi = log((1+u)/(1-u)).
//
// Everything is assembled from g0 data of the radial triple (u, |Du|, D2u,
// Ric) through closed conversion formulas.  With a = 1 - u^2:
//   |grad phi|_g  = 2 |Du| a^{-(n-1)/(n-2)}
//   |hess phi|^2_g = 4 a^{-2n/(n-2)} |D2u|^2
//                  + 16 n/(n-2) u a^{-(3n-2)/(n-2)} D2u(Du,Du)
//                  + 16 n(n-1)/(n-2)^2 u^2 a^{-4(n-1)/(n-2)} |Du|^4
//   hess phi(grad phi, grad phi) = lambda^2 |Du|^2 P with lambda^2 |Du|^2 = |grad phi|^2 a^{-2/(n-2)}
//   Ric_g(grad phi, grad phi) = lambda^2|Du|^2 Ric0(nu,nu) + u hess phi(grad phi, grad phi)
//                             + |grad phi|^4 a (n-1)/(2(n-2))
// where P = (2/a)[D2u(nu,nu) + (n-1)/(n-2) (2u/a) |Du|^2] is the g0-frame
// radial entry of the Hessian of phi.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/geometry.hpp"
#include "substatic/monotone.hpp"
#include "substatic/numerics.hpp"
#include "substatic/radial.hpp"

namespace substatic::conformal {

using radial::RadialTriple;

struct ConformalState {
    int n = 3;
    double r = 0;
    double u = 0;
    double one_minus_u = 1;
    double phi = 0;
    double grad_phi_norm = 0;
    double hess_phi_norm2 = 0;
    double grad_of_grad_norm2 = 0;
    double hess_phi_nn = 0;  // hess phi (grad phi, grad phi)
    double mean_curv_g = 0;
    double area_g = 0;       // g-area of the level sphere through r
    std::optional<double> Q_phi_phi;

    double Q() const
    {
        require(Q_phi_phi.has_value(), ErrorKind::boundary_point, "Q is singular where phi = 0");
        return *Q_phi_phi;
    }
};

namespace detail {

inline ConformalState state_from(const RadialTriple& tr, double r, double u, double v)
{
    const int n = tr.n();
    const double k = n - 2.0;
    const double a = v * (2.0 - v);  // 1 - u^2
    const double G = tr.grad_norm(r);
    const auto c = geometry::detail::curvature_closed_form(tr.profile(), r, tr.flux_constant());
    const double hr = c.hessian_radial, ht = c.hessian_tangential;

    ConformalState s;
    s.n = n;
    s.r = r;
    s.u = u;
    s.one_minus_u = v;
    s.phi = std::log((2.0 - v) / v);
    s.grad_phi_norm = 2.0 * G * std::pow(a, -(n - 1.0) / k);

    const double hess0_2 = hr * hr + (n - 1.0) * ht * ht;
    s.hess_phi_norm2 = 4.0 * std::pow(a, -2.0 * n / k) * hess0_2 +
                       16.0 * n / k * u * std::pow(a, -(3.0 * n - 2.0) / k) * hr * G * G +
                       16.0 * n * (n - 1.0) / (k * k) * u * u * std::pow(a, -4.0 * (n - 1.0) / k) * G * G * G * G;

    const double P = 2.0 / a * (hr + (n - 1.0) / k * (2.0 * u / a) * G * G);
    // grad |grad phi| is normal, its g-norm is the g-normalized P.
    const double Pg = P * std::pow(a, -2.0 / k);
    s.grad_of_grad_norm2 = Pg * Pg;

    const double G2 = s.grad_phi_norm * s.grad_phi_norm;
    const double lam2G2 = G2 * std::pow(a, -2.0 / k);
    s.hess_phi_nn = lam2G2 * P;
    s.mean_curv_g = -s.hess_phi_nn / (G2 * s.grad_phi_norm);
    s.area_g = std::pow(a, (n - 1.0) / k) * sphere_area(n - 1) * std::pow(r, n - 1.0);

    if (u > 0) {
        const double ric_g = lam2G2 * c.ricci_radial + u * s.hess_phi_nn + G2 * G2 * a * (n - 1.0) / (2.0 * k);
        const double coth = (1.0 + u * u) / (2.0 * u);
        s.Q_phi_phi = ric_g - coth * s.hess_phi_nn;
    }
    return s;
}

} // namespace detail

inline ConformalState conformal_state(const RadialTriple& tr, double r)
{
    require(r > tr.r0() || (tr.profile().boundary() == geometry::BoundaryKind::regular && r >= tr.r0()),
            ErrorKind::out_of_domain, "radius must lie outside the boundary");
    const auto [u, v] = tr.eval(r);
    return detail::state_from(tr, r, u, v);
}

// State on the level {phi = s}.
inline ConformalState state_at_s(const RadialTriple& tr, double s)
{
    require(s >= 0 && std::isfinite(s), ErrorKind::invalid_parameter, "s must be nonnegative");
    const double v = 2.0 / (1.0 + std::exp(s));
    const double u = 1.0 - v;
    const double r = tr.radius_at_level(u, v);
    return detail::state_from(tr, r, u, v);
}

inline double max_s(const RadialTriple& tr)
{
    const double v = tr.node_one_minus_u().back();
    return std::log((2.0 - v) / v);
}

inline double kato_check(const ConformalState& st)
{
    require(st.grad_phi_norm > 0, ErrorKind::undefined_at_critical_point, "gradient vanishes");
    return st.hess_phi_norm2 - (double(st.n) / (st.n - 1.0)) * st.grad_of_grad_norm2;
}

inline double divY_integrand(const ConformalState& st, double beta)
{
    require(st.phi > 0, ErrorKind::boundary_point, "divY is singular where phi = 0");
    require(st.grad_phi_norm > 0, ErrorKind::undefined_at_critical_point, "gradient vanishes");
    const double g = st.grad_phi_norm;
    return beta * std::pow(g, beta - 2.0) *
           ((beta - 2.0) * st.grad_of_grad_norm2 + st.hess_phi_norm2 + st.Q()) / std::sinh(st.phi);
}

inline double Phi_beta(const RadialTriple& tr, double beta, double s)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    const auto st = state_at_s(tr, s);
    return std::pow(st.grad_phi_norm, beta + 1.0) * st.area_g;
}

inline double Psi_beta(const RadialTriple& tr, double beta, double s)
{
    require(s > 0, ErrorKind::boundary_point, "Psi is singular at s = 0");
    const auto st = state_at_s(tr, s);
    return std::pow(st.grad_phi_norm, beta) * st.mean_curv_g * st.area_g / std::sinh(s);
}

inline double Phi_beta_prime(const RadialTriple& tr, double beta, double s)
{
    return -beta * std::sinh(s) * Psi_beta(tr, beta, s);
}

inline double Phi_beta_fd(const RadialTriple& tr, double beta, double s, double h = 1e-4)
{
    h = std::min(h, 0.5 * s);
    return (Phi_beta(tr, beta, s + h) - Phi_beta(tr, beta, s - h)) / (2.0 * h);
}

struct IdentityResidual {
    double s_low = 0;
    double s_high = 0;
    double lhs_boundary = 0;
    double rhs_volume = 0;
    double residual = 0;
    double relative_residual = 0;
    int panels = 0;
};

// eps is the floor of the relative residual denominator, set from the natural
// size of the boundary terms so that identically vanishing sides compare sanely.
inline IdentityResidual make_residual(double s_low, double s_high, double lhs, double rhs, int panels, double eps)
{
    IdentityResidual r;
    r.s_low = s_low;
    r.s_high = s_high;
    r.lhs_boundary = lhs;
    r.rhs_volume = rhs;
    r.residual = std::abs(lhs - rhs);
    r.relative_residual = r.residual / std::max({std::abs(lhs), std::abs(rhs), eps, 1e-300});
    r.panels = panels;
    return r;
}

inline constexpr int default_panels = 128;

inline double boundary_scale(const RadialTriple& tr, double beta, double s)
{
    return 1e-8 * Phi_beta(tr, beta, s) / std::sinh(s);
}

// Psi(s_low) - Psi(s_high) against the volume integral of the divY bracket
// (without the leading beta).  dmu_g = area_g ds / |grad phi|.
inline IdentityResidual integral_identity_residual(const RadialTriple& tr, double beta, double s_low,
                                                   double s_high, int panels = default_panels)
{
    require(beta > monotone::threshold(tr.n()), ErrorKind::invalid_parameter, "beta must exceed the threshold");
    require(s_low > 0 && s_high > s_low, ErrorKind::invalid_parameter, "need 0 < s_low < s_high");
    const double lhs = Psi_beta(tr, beta, s_low) - Psi_beta(tr, beta, s_high);
    auto f = [&](double s) {
        const auto st = state_at_s(tr, s);
        const double g = st.grad_phi_norm;
        const double bracket = (beta - 2.0) * st.grad_of_grad_norm2 + st.hess_phi_norm2 + st.Q();
        return std::pow(g, beta - 2.0) * bracket / std::sinh(s) * st.area_g / g;
    };
    const double rhs = simpson(f, s_low, s_high, panels);
    require(std::isfinite(rhs), ErrorKind::accuracy, "volume quadrature failed");
    return make_residual(s_low, s_high, lhs, rhs, panels, boundary_scale(tr, beta, s_low));
}

// Phi(S)/sinh S - Phi(s)/sinh s against the volume integral of
// [beta hess phi(grad phi, grad phi) - coth(phi)|grad phi|^4] |grad phi|^{beta-2}/sinh phi.
inline IdentityResidual quotient_identity_residual(const RadialTriple& tr, double beta, double s_low, double s_high,
                                                int panels = default_panels)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    require(s_low > 0 && s_high > s_low, ErrorKind::invalid_parameter, "need 0 < s_low < s_high");
    const double lhs = Phi_beta(tr, beta, s_high) / std::sinh(s_high) - Phi_beta(tr, beta, s_low) / std::sinh(s_low);
    auto f = [&](double s) {
        const auto st = state_at_s(tr, s);
        const double g = st.grad_phi_norm;
        const double bracket = beta * st.hess_phi_nn - std::cosh(s) / std::sinh(s) * g * g * g * g;
        return std::pow(g, beta - 2.0) * bracket / std::sinh(s) * st.area_g / g;
    };
    const double rhs = simpson(f, s_low, s_high, panels);
    require(std::isfinite(rhs), ErrorKind::accuracy, "volume quadrature failed");
    return make_residual(s_low, s_high, lhs, rhs, panels, boundary_scale(tr, beta, s_low));
}

struct CylinderReport {
    double s_max = 0;
    double sup_grad_phi = 0;
    double sup_hess_phi = 0;
    double sup_area = 0;
    double grad_phi_norm2_far = 0;
    double grad_phi_norm2_limit = 0;      // (2C)^{-2/(n-2)} (n-2)^2
    double area_far = 0;
    double area_limit = 0;                // (2C)^{(n-1)/(n-2)} |S^{n-1}|
    double hess_phi_norm2_far = 0;        // observed
    double hess_phi_norm2_stated = 0;     // (n-1)(15n-1)(n-2)^2 (2C)^{-4/(n-2)}
    bool stated_limit_discrepancy = false;
};

inline CylinderReport cylinder_limit_check(const RadialTriple& tr, double s_start = 1.0, std::size_t count = 400)
{
    const int n = tr.n();
    const double k = n - 2.0;
    const double cap = tr.capacity();
    CylinderReport rep;
    rep.s_max = max_s(tr) * (1.0 - 1e-12);
    for (double s : linspace(std::min(s_start, 0.5 * rep.s_max), rep.s_max, count)) {
        const auto st = state_at_s(tr, s);
        rep.sup_grad_phi = std::max(rep.sup_grad_phi, st.grad_phi_norm);
        rep.sup_hess_phi = std::max(rep.sup_hess_phi, std::sqrt(std::max(st.hess_phi_norm2, 0.0)));
        rep.sup_area = std::max(rep.sup_area, st.area_g);
    }
    const auto far = state_at_s(tr, rep.s_max);
    rep.grad_phi_norm2_far = far.grad_phi_norm * far.grad_phi_norm;
    rep.grad_phi_norm2_limit = std::pow(2.0 * cap, -2.0 / k) * k * k;
    rep.area_far = far.area_g;
    rep.area_limit = std::pow(2.0 * cap, (n - 1.0) / k) * sphere_area(n - 1);
    rep.hess_phi_norm2_far = far.hess_phi_norm2;
    rep.hess_phi_norm2_stated = (n - 1.0) * (15.0 * n - 1.0) * k * k * std::pow(2.0 * cap, -4.0 / k);
    rep.stated_limit_discrepancy =
        std::abs(rep.hess_phi_norm2_far - rep.hess_phi_norm2_stated) > 0.1 * rep.hess_phi_norm2_stated;
    return rep;
}

} // namespace substatic::conformal
