#pragma once

// F_beta(tau) = (1+tau)^{beta(n-1)/(n-2)} int_{u=t} |Du|^{beta+1} dsigma,
// t = sqrt((tau-1)/(tau+1)).  On a radial triple the level is a round sphere,
// so every level integral is a pointwise value times |S| r^{n-1}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/geometry.hpp"
#include "substatic/numerics.hpp"
#include "substatic/radial.hpp"

namespace substatic::monotone {

using radial::RadialTriple;

struct Level {
    double t = 0;
    double one_minus_t = 1;
};

inline Level level_from_tau(double tau)
{
    require(tau >= 1.0 && std::isfinite(tau), ErrorKind::invalid_parameter, "tau must be at least 1");
    const double a = std::sqrt(tau + 1.0);
    const double b = std::sqrt(tau - 1.0);
    return {b / a, 2.0 / (a * (a + b))};
}

inline double tau_from_level(double t)
{
    return (1.0 + t * t) / (1.0 - t * t);
}

// The conformal parameter s = log((1+t)/(1-t)) of the same level.
inline double s_from_tau(double tau)
{
    const Level l = level_from_tau(tau);
    return std::log((2.0 - l.one_minus_t) / l.one_minus_t);
}

inline double threshold(int n) { return (n - 2.0) / (n - 1.0); }

namespace detail {

struct LevelData {
    double r, u, G, H, k, area;
};

inline LevelData level_data(const RadialTriple& tr, double tau)
{
    const Level l = level_from_tau(tau);
    const int n = tr.n();
    LevelData d;
    d.r = tr.radius_at_level(l.t, l.one_minus_t);
    d.u = l.t;
    d.G = tr.grad_norm(d.r);
    const auto c = geometry::detail::curvature_closed_form(tr.profile(), d.r, tr.flux_constant());
    // H = -D2u(Du,Du)/|Du|^3 with the infinity-pointing normal.
    d.H = -c.hessian_radial / d.G;
    d.k = 2.0 * l.t / (l.one_minus_t * (2.0 - l.one_minus_t));
    d.area = sphere_area(n - 1) * std::pow(d.r, n - 1.0);
    return d;
}

inline double exponent(int n, double beta) { return beta * (n - 1.0) / (n - 2.0); }

} // namespace detail

inline double F_beta(const RadialTriple& tr, double beta, double tau)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    const auto d = detail::level_data(tr, tau);
    return std::pow(1.0 + tau, detail::exponent(tr.n(), beta)) * std::pow(d.G, beta + 1.0) * d.area;
}

inline double F_beta_prime_analytic(const RadialTriple& tr, double beta, double tau)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    require(tau > 1.0, ErrorKind::invalid_parameter, "the derivative needs tau > 1");
    const int n = tr.n();
    const auto d = detail::level_data(tr, tau);
    const double bracket = d.H - (n - 1.0) / (n - 2.0) * d.k * d.G;
    return -beta * std::pow(tau + 1.0, detail::exponent(n, beta) - 1.5) / std::sqrt(tau - 1.0) *
           std::pow(d.G, beta) * bracket * d.area;
}

// Four-term second derivative; the tangential-gradient and umbilicity terms
// are evaluated from the radial data rather than dropped.
inline double F_beta_second_analytic(const RadialTriple& tr, double beta, double tau)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    require(tau > 1.0, ErrorKind::invalid_parameter, "the derivative needs tau > 1");
    const int n = tr.n();
    const auto d = detail::level_data(tr, tau);
    const auto c = geometry::curvature_at(tr.profile(), d.r, tr.flux_constant());
    const double bracket = d.H - (n - 1.0) / (n - 2.0) * d.k * d.G;

    const double t1 = (beta - threshold(n)) * std::pow(d.G, beta - 1.0) * bracket * bracket;
    const double tangential_grad2 = 0.0;  // |Du| is constant on the sphere
    const double t2 = beta * std::pow(d.G, beta - 3.0) * tangential_grad2;
    // h = D2u restricted to the level / |Du|; the sphere is umbilic.
    const double kappa = c.hessian_tangential / d.G;
    const double h2 = (n - 1.0) * kappa * kappa;
    const double t3 = std::pow(d.G, beta - 1.0) * (h2 - d.H * d.H / (n - 1.0));
    const double t4 = std::pow(d.G, beta - 1.0) * (c.ricci_radial - c.hessian_radial / d.u);
    return beta * std::pow(tau + 1.0, detail::exponent(n, beta) - 3.0) / (tau - 1.0) * (t1 + t2 + t3 + t4) *
           d.area;
}

// F_beta(1) in terms of capacity and boundary area.
inline double F_beta_at_one_closed_form(int n, double beta, double cap, double boundary_area)
{
    const double S = sphere_area(n - 1);
    return std::pow(2.0, beta * (n - 1.0) / (n - 2.0)) * std::pow(n - 2.0, beta + 1.0) *
           std::pow(cap, beta + 1.0) * std::pow(S, beta + 1.0) / std::pow(boundary_area, beta);
}

inline double F_beta_limit_closed_form(int n, double beta, double cap)
{
    return std::pow(n - 2.0, beta + 1.0) * std::pow(cap, 1.0 - beta / (n - 2.0)) * sphere_area(n - 1);
}

enum class Parameterization { tau, s };

struct CurveSample {
    double x = 0;  // tau or s
    double t = 0;
    double value = 0;
    double analytic_derivative = 0;
    double fd_derivative = 0;
};

struct MonotoneCurve {
    double beta = 0;
    Parameterization parameterization = Parameterization::tau;
    std::vector<CurveSample> samples;
    std::string label;
    std::size_t resolution = 0;
    bool substatic = false;       // substatic_check verdict for the triple
    bool below_threshold = false; // the no-theorem flag
    bool theorem_applies = false;
    double verdict_tol = 0;
    double max_fd_derivative = -std::numeric_limits<double>::infinity();
    double min_second_difference = std::numeric_limits<double>::infinity();
    bool nonincreasing = false;
    bool convex = false;
};

inline std::vector<double> default_tau_grid(std::size_t count = 200, double lo = 1e-3, double hi = 1e3)
{
    auto g = geometric_offsets(lo, hi, count);
    for (auto& x : g)
        x += 1.0;
    return g;
}

inline double fd_step(double tau)
{
    return std::min(1e-4 * tau, 0.5 * (tau - 1.0));
}

inline double F_beta_fd_derivative(const RadialTriple& tr, double beta, double tau)
{
    const double h = fd_step(tau);
    return (F_beta(tr, beta, tau + h) - F_beta(tr, beta, tau - h)) / (2.0 * h);
}

inline double F_beta_fd_second(const RadialTriple& tr, double beta, double tau)
{
    const double h = std::min(1e-3 * tau, 0.5 * (tau - 1.0));
    return (F_beta(tr, beta, tau + h) - 2.0 * F_beta(tr, beta, tau) + F_beta(tr, beta, tau - h)) / (h * h);
}

inline std::vector<double> substatic_samples(const RadialTriple& tr, std::size_t count = 400)
{
    std::vector<double> out;
    for (double x : geometric_offsets(1e-6, tr.r_max() / tr.r0() - 1.0, count))
        out.push_back(std::min(tr.r0() * (1.0 + x), tr.r_max()));
    return out;
}

inline MonotoneCurve monotone_curve(const RadialTriple& tr, double beta, std::span<const double> taus)
{
    require(beta >= 0, ErrorKind::invalid_parameter, "beta must be nonnegative");
    const int n = tr.n();
    MonotoneCurve c;
    c.beta = beta;
    c.label = tr.label();
    c.resolution = taus.size();
    const auto rs = substatic_samples(tr);
    c.substatic = geometry::substatic_check(tr, rs).is_substatic;
    c.below_threshold = beta < threshold(n) - 1e-15;
    c.theorem_applies = c.substatic && !c.below_threshold;

    const double F1 = F_beta(tr, beta, 1.0);
    double h_min = std::numeric_limits<double>::infinity();
    for (double tau : taus) {
        CurveSample s;
        s.x = tau;
        s.t = level_from_tau(tau).t;
        s.value = F_beta(tr, beta, tau);
        if (tau > 1.0) {
            s.analytic_derivative = F_beta_prime_analytic(tr, beta, tau);
            s.fd_derivative = F_beta_fd_derivative(tr, beta, tau);
            h_min = std::min(h_min, fd_step(tau));
            c.max_fd_derivative = std::max(c.max_fd_derivative, s.fd_derivative);
        }
        c.samples.push_back(s);
    }
    // Change of consecutive divided differences.
    for (std::size_t i = 1; i + 1 < c.samples.size(); ++i) {
        const auto& a = c.samples[i - 1];
        const auto& b = c.samples[i];
        const auto& d = c.samples[i + 1];
        const double left = (b.value - a.value) / (b.x - a.x);
        const double right = (d.value - b.value) / (d.x - b.x);
        c.min_second_difference = std::min(c.min_second_difference, right - left);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    c.verdict_tol = 10.0 * tr.tol() * std::abs(F1) + (std::isfinite(h_min) ? 100.0 * eps * std::abs(F1) / h_min : 0.0);
    c.nonincreasing = c.max_fd_derivative <= c.verdict_tol;
    c.convex = c.min_second_difference >= -c.verdict_tol;
    return c;
}

struct LimitReport {
    double limit = 0;
    double F_at_1000 = 0;
    double rel_diff = 0;
    bool within_one_percent = false;
};

inline LimitReport limit_F(const RadialTriple& tr, double beta)
{
    LimitReport r;
    r.limit = F_beta_limit_closed_form(tr.n(), beta, tr.capacity());
    try {
        r.F_at_1000 = F_beta(tr, beta, 1e3);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::out_of_domain)
            fail(ErrorKind::truncation_domain, "tau = 1e3 lies beyond r_max");
        throw;
    }
    r.rel_diff = std::abs(r.F_at_1000 - r.limit) / std::abs(r.limit);
    r.within_one_percent = r.rel_diff <= 0.01;
    require(r.rel_diff <= 0.05, ErrorKind::truncation_domain, "F at tau = 1e3 is far from its limit");
    return r;
}

struct PenroseReport {
    double capacity = 0;
    double boundary_area = 0;
    double rhs = 0;
    double margin = 0;
    double tol = 1e-8;
    bool equality = false;
};

inline PenroseReport make_penrose_report(int n, double cap, double area, double tol = 1e-8)
{
    PenroseReport p;
    p.capacity = cap;
    p.boundary_area = area;
    p.rhs = 0.5 * std::pow(area / sphere_area(n - 1), (n - 2.0) / (n - 1.0));
    p.margin = cap - p.rhs;
    p.tol = tol;
    p.equality = std::abs(p.margin) < tol;
    return p;
}

inline PenroseReport penrose_check(const RadialTriple& tr)
{
    const int n = tr.n();
    const auto cap = radial::capacity(tr);
    return make_penrose_report(n, cap.agreed_value, sphere_area(n - 1) * std::pow(tr.r0(), n - 1.0));
}

} // namespace substatic::monotone
