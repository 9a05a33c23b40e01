#pragma once

// Warped products g0 = f^{-1} dr^2 + r^2 g_S and their curvature.
//
// In the orthonormal frame {sqrt(f) d/dr, r^{-1} e_a}:
//   Ric_rad = -(n-1) f' / (2r)
//   Ric_tan = -f' / (2r) + (n-2)(1-f) / r^2
//   R       = Ric_rad + (n-1) Ric_tan
// For the radial harmonic potential with |Du| = C r^{1-n}:
//   D2u_rad = -(n-1) C sqrt(f) r^{-n},  D2u_tan = C sqrt(f) r^{-n}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/numerics.hpp"

namespace substatic::geometry {

class Dimension {
public:
    explicit Dimension(int n) : n_(n)
    {
        require(n >= 3, ErrorKind::invalid_parameter, "dimension must be at least 3");
    }
    int value() const noexcept { return n_; }
    operator int() const noexcept { return n_; }

private:
    int n_;
};

enum class BoundaryKind { horizon, regular };

class WarpProfile {
public:
    using Fn = std::function<double(double)>;

    // f_gap(d) = f(r0 + d), supplied when it can be evaluated without the
    // cancellation that plain f suffers next to a horizon.
    WarpProfile(std::string label, Dimension n, double r0, BoundaryKind kind, Fn f, Fn fp, Fn fpp,
                Fn f_gap = {})
        : label_(std::move(label)), n_(n), r0_(r0), kind_(kind), f_(std::move(f)), fp_(std::move(fp)),
          fpp_(std::move(fpp)), gap_(std::move(f_gap))
    {
        require(r0_ > 0 && std::isfinite(r0_), ErrorKind::invalid_parameter, "r0 must be positive");
        if (kind_ == BoundaryKind::horizon) {
            require(std::abs(f_(r0_)) <= 1e-12, ErrorKind::invalid_parameter, "f(r0) must vanish");
            require(fp_(r0_) > 0, ErrorKind::degenerate_horizon, "f'(r0) must be positive");
        } else {
            require(f_(r0_) > 0, ErrorKind::invalid_parameter, "regular boundary needs f(r0) > 0");
        }
        for (double x : geometric_offsets(1e-6, 1e6, 240))
            require(f_(r0_ * (1.0 + x)) > 0, ErrorKind::invalid_parameter, "f must be positive beyond r0");
        require(std::abs(f_(1e6 * r0_) - 1.0) < 1e-3, ErrorKind::invalid_parameter,
                "f must tend to 1 at infinity");
    }

    const std::string& label() const noexcept { return label_; }
    Dimension dimension() const noexcept { return n_; }
    double r0() const noexcept { return r0_; }
    BoundaryKind boundary() const noexcept { return kind_; }

    double f(double r) const { return f_(r); }
    double f_prime(double r) const { return fp_(r); }
    double f_second(double r) const { return fpp_(r); }
    double f_gap(double d) const { return gap_ ? gap_(d) : f_(r0_ + d); }

private:
    std::string label_;
    Dimension n_;
    double r0_;
    BoundaryKind kind_;
    Fn f_, fp_, fpp_, gap_;
};

inline WarpProfile schwarzschild_profile(Dimension n, double m)
{
    require(m > 0 && std::isfinite(m), ErrorKind::invalid_parameter, "mass must be positive");
    const double k = n - 2.0;
    const double r0 = std::pow(2.0 * m, 1.0 / k);
    return WarpProfile(
        "schwarzschild", n, r0, BoundaryKind::horizon,
        [m, k](double r) { return 1.0 - 2.0 * m * std::pow(r, -k); },
        [m, k](double r) { return 2.0 * m * k * std::pow(r, -k - 1.0); },
        [m, k](double r) { return -2.0 * m * k * (k + 1.0) * std::pow(r, -k - 2.0); },
        [r0, k](double d) { return -std::expm1(-k * std::log1p(d / r0)); });
}

// f = 1 - 2m x + q^2 x^2 with x = r^{2-n}; outer root located by bisection.
inline WarpProfile reissner_nordstrom_profile(Dimension n, double m, double q)
{
    require(m > 0 && std::isfinite(m) && std::isfinite(q), ErrorKind::invalid_parameter,
            "mass must be positive");
    if (q == 0.0)
        return schwarzschild_profile(n, m);
    const double k = n - 2.0;
    const double q2 = q * q;
    require(m * m - q2 > 1e-12 * m * m, ErrorKind::degenerate_horizon,
            "no simple outer horizon (m^2 - q^2 must be positive)");

    auto f = [m, q2, k](double r) {
        const double x = std::pow(r, -k);
        return 1.0 - 2.0 * m * x + q2 * x * x;
    };
    auto fp = [m, q2, k](double r) {
        const double x = std::pow(r, -k);
        return k * x / r * (2.0 * m - 2.0 * q2 * x);
    };
    auto fpp = [m, q2, k](double r) {
        const double x = std::pow(r, -k);
        return -k * (k + 1.0) * x / (r * r) * 2.0 * m + 2.0 * q2 * k * (2.0 * k + 1.0) * x * x / (r * r);
    };

    // f attains its minimum 1 - m^2/q^2 < 0 at x = m/q^2.
    double lo = std::pow(q2 / m, 1.0 / k);
    double hi = 10.0 * std::pow(2.0 * m, 1.0 / k);
    require(f(lo) < 0 && f(hi) > 0, ErrorKind::degenerate_horizon, "outer horizon not bracketed");
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? hi : lo) = mid;
    }
    const double r0 = 0.5 * (lo + hi);
    // f = (1 - x/x0)(1 - x/x1) with x0, x1 the roots in x = r^{2-n}.
    const double x0 = std::pow(r0, -k);
    const double x1 = 1.0 / (q2 * x0);
    auto gap = [r0, k, x0, x1](double d) {
        const double a = -std::expm1(-k * std::log1p(d / r0));
        const double x = x0 * (1.0 - a);
        return a * (1.0 - x / x1);
    };
    return WarpProfile("reissner-nordstrom", n, r0, BoundaryKind::horizon, f, fp, fpp, gap);
}

// Flat exterior of a round ball of radius r0: f = 1.
inline WarpProfile flat_exterior_profile(Dimension n, double r0)
{
    return WarpProfile(
        "flat-exterior", n, r0, BoundaryKind::regular, [](double) { return 1.0; },
        [](double) { return 0.0; }, [](double) { return 0.0; });
}

struct CurvaturePoint {
    double r = 0;
    double ricci_radial = 0;
    double ricci_tangential = 0;
    double scalar = 0;
    double hessian_radial = 0;
    double hessian_tangential = 0;
};

namespace detail {

inline CurvaturePoint curvature_closed_form(const WarpProfile& p, double r, double flux_constant)
{
    const int n = p.dimension();
    const double f = p.f(r);
    const double fp = p.f_prime(r);
    CurvaturePoint c;
    c.r = r;
    c.ricci_radial = -(n - 1) * fp / (2.0 * r);
    c.ricci_tangential = -fp / (2.0 * r) + (n - 2) * (1.0 - f) / (r * r);
    c.scalar = c.ricci_radial + (n - 1) * c.ricci_tangential;
    const double s = flux_constant * std::sqrt(std::max(f, 0.0)) * std::pow(r, -n);
    c.hessian_radial = -(n - 1) * s;
    c.hessian_tangential = s;
    return c;
}

} // namespace detail

// flux_constant C gives the Hessian of the radial potential with |Du| = C r^{1-n};
// leave it at zero for curvature alone.
inline CurvaturePoint curvature_at(const WarpProfile& p, double r, double flux_constant = 0.0)
{
    require(r > p.r0() || (p.boundary() == BoundaryKind::regular && r >= p.r0()), ErrorKind::out_of_domain,
            "curvature requested inside the boundary");
    return detail::curvature_closed_form(p, r, flux_constant);
}

struct SubStaticSample {
    double r = 0;
    double radial_entry = 0;
    double tangential_entry = 0;
    double min_eigenvalue = 0;
};

struct SubStaticReport {
    std::vector<SubStaticSample> samples;
    double global_min = std::numeric_limits<double>::infinity();
    double tol = 0;
    bool is_substatic = false;
};

// u Ric - D2u is diagonal in the orthonormal frame for radial u.
template <class Triple>
SubStaticReport substatic_check(const Triple& triple, std::span<const double> r_samples)
{
    SubStaticReport rep;
    double scale = 0.0;
    for (double r : r_samples) {
        require(r >= triple.r0() && r <= triple.r_max(), ErrorKind::out_of_domain,
                "sample radius outside the tabulated range");
        const double u = triple.u(r);
        const auto c = curvature_at(triple.profile(), r, triple.flux_constant());
        SubStaticSample s;
        s.r = r;
        s.radial_entry = u * c.ricci_radial - c.hessian_radial;
        s.tangential_entry = u * c.ricci_tangential - c.hessian_tangential;
        s.min_eigenvalue = std::min(s.radial_entry, s.tangential_entry);
        scale = std::max({scale, std::abs(u * c.ricci_radial), std::abs(u * c.ricci_tangential)});
        rep.global_min = std::min(rep.global_min, s.min_eigenvalue);
        rep.samples.push_back(s);
    }
    rep.tol = 1e-9 * (1.0 + scale);
    rep.is_substatic = rep.global_min >= -rep.tol;
    return rep;
}

} // namespace substatic::geometry
