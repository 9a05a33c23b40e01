#pragma once

// Radial harmonic potential: u' = C f^{-1/2} r^{1-n}, u(r0) = 0, u(inf) = 1.
//
// The table stores u and 1 - u at nodes.  Values between nodes come from a
// local quadrature, so 1 - u keeps full relative accuracy far out where u is
// within rounding of 1.  Horizon profiles are integrated in w with
// s = r0 + w^2, which removes the inverse square root at r0.  The far tail
// uses s = r_max / x on [0, 1].

#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp uses unqualified isnan
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/geometry.hpp"
#include "substatic/numerics.hpp"

namespace substatic::radial {

using geometry::BoundaryKind;
using geometry::Dimension;
using geometry::WarpProfile;

struct RadialDiagnostics {
    double quadrature_error = 0;   // summed absolute error estimate of I(inf)
    double tail_value = 0;         // quadrature of the far tail
    double tail_flat_value = 0;    // r_max^{2-n}/(n-2), the f = 1 tail
    double tail_f_deviation = 0;   // max |f - 1| sampled beyond r_max
    double normalization_error = 0;
    std::size_t nodes = 0;
};

class RadialTriple {
public:
    const WarpProfile& profile() const noexcept { return *profile_; }
    Dimension dimension() const noexcept { return profile_->dimension(); }
    int n() const noexcept { return profile_->dimension(); }
    double r0() const noexcept { return profile_->r0(); }
    double r_max() const noexcept { return r_.back(); }
    double flux_constant() const noexcept { return C_; }
    double capacity() const noexcept { return C_ / (n() - 2); }
    double tol() const noexcept { return tol_; }
    const RadialDiagnostics& diagnostics() const noexcept { return diag_; }
    std::span<const double> nodes() const noexcept { return r_; }
    std::span<const double> node_u() const noexcept { return u_; }
    std::span<const double> node_one_minus_u() const noexcept { return v_; }
    const std::string& label() const noexcept { return profile_->label(); }

    // |Du| = sqrt(f) u' exactly.
    double grad_norm(double r) const { return C_ * std::pow(r, 1.0 - n()); }
    // Coordinate derivative du/dr.
    double du_dr(double r) const
    {
        return C_ / std::sqrt(profile_->f(r)) * std::pow(r, 1.0 - n());
    }

    double u(double r) const { return eval(r).first; }
    double one_minus_u(double r) const { return eval(r).second; }
    // (u, 1 - u) both to full relative accuracy.
    std::pair<double, double> eval(double r) const
    {
        require(r >= r0(), ErrorKind::out_of_domain, "radius inside the boundary");
        if (r >= r_max()) {
            const double v = C_ * tail(r).value;
            return {1.0 - v, v};
        }
        const std::size_t k = segment_of(r);
        const double left = C_ * seg(r_[k], r);
        const double right = C_ * seg_[k] - left;
        const double u_left = u_[k] + left;
        const double v_right = v_[k + 1] + std::max(right, 0.0);
        if (u_left < 0.5)
            return {u_left, 1.0 - u_left};
        return {1.0 - v_right, v_right};
    }

    // Monotone cubic interpolant of the node table.
    double u_interpolated(double r) const
    {
        require(r >= r0() && r <= r_max(), ErrorKind::out_of_domain, "radius outside the table");
        return (*spline_)(r);
    }

    double max_level() const noexcept { return u_.back(); }

    // Radius of the sphere {u = t}; one_minus_t may be passed for t near 1.
    double radius_at_level(double t, double one_minus_t = -1.0) const
    {
        if (one_minus_t < 0)
            one_minus_t = 1.0 - t;
        require(t >= 0 && one_minus_t > 0, ErrorKind::out_of_domain, "level outside [0, 1)");
        if (t == 0.0)
            return r0();
        if (one_minus_t < v_.back()) {
            // Beyond the table: invert the exact tail.
            auto g = [&](double r) { return C_ * tail(r).value - one_minus_t; };
            double a = r_max(), b = 2.0 * a;
            double ga = g(a), gb = g(b);
            while (gb > 0) {
                require(b < 1e300, ErrorKind::out_of_domain, "level beyond any finite radius");
                a = b;
                ga = gb;
                b *= 2.0;
                gb = g(b);
            }
            if (gb == 0)
                return b;
            std::uintmax_t iters = 200;
            auto res = boost::math::tools::toms748_solve(g, a, b, ga, gb,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
            return 0.5 * (res.first + res.second);
        }
        const bool upper = t > 0.5;
        std::size_t k;
        if (!upper) {
            k = std::size_t(std::upper_bound(u_.begin(), u_.end(), t) - u_.begin());
        } else {
            // v is decreasing
            k = std::size_t(std::upper_bound(v_.begin(), v_.end(), one_minus_t,
                                             [](double a, double b) { return a > b; }) -
                            v_.begin());
        }
        k = std::clamp<std::size_t>(k, 1, r_.size() - 1) - 1;
        if (!upper && u_[k] == t)
            return r_[k];
        if (upper && v_[k] == one_minus_t)
            return r_[k];

        auto g = [&](double r) {
            const double left = C_ * seg(r_[k], r);
            if (!upper)
                return u_[k] + left - t;
            return one_minus_t - (v_[k + 1] + (C_ * seg_[k] - left));
        };
        double a = r_[k], b = r_[k + 1];
        double ga = g(a), gb = g(b);
        if (ga >= 0)
            return a;
        if (gb <= 0)
            return b;
        std::uintmax_t iters = 200;
        auto res = boost::math::tools::toms748_solve(g, a, b, ga, gb,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
        return 0.5 * (res.first + res.second);
    }

    friend RadialTriple solve_radial_potential(const WarpProfile&, double, double);

private:
    std::shared_ptr<const WarpProfile> profile_;
    double C_ = 0;
    double tol_ = 0;
    std::vector<double> r_, u_, v_, seg_;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline_;
    RadialDiagnostics diag_;

    std::size_t segment_of(double r) const
    {
        auto it = std::upper_bound(r_.begin(), r_.end(), r);
        std::size_t k = std::size_t(it - r_.begin());
        return std::clamp<std::size_t>(k, 1, r_.size() - 1) - 1;
    }

    double integrand(double s) const
    {
        const int n = profile_->dimension();
        return std::pow(s, 1.0 - n) / std::sqrt(profile_->f(s));
    }

    // 2w f(r0 + w^2)^{-1/2} (r0 + w^2)^{1-n}
    double integrand_w(double w) const
    {
        const auto& p = *profile_;
        const int n = p.dimension();
        const double d = w * w;
        const double s = p.r0() + d;
        const double q = d > 0 ? p.f_gap(d) / d : p.f_prime(p.r0());
        return 2.0 * std::pow(s, 1.0 - n) / std::sqrt(q);
    }

    QuadResult seg_quad(double a, double b) const
    {
        const auto& p = *profile_;
        if (p.boundary() == BoundaryKind::horizon) {
            const double r0 = p.r0();
            const double wa = std::sqrt(std::max(a - r0, 0.0));
            const double wb = std::sqrt(std::max(b - r0, 0.0));
            return integrate([&](double w) { return integrand_w(w); }, wa, wb);
        }
        return integrate([&](double s) { return integrand(s); }, a, b);
    }

    double seg(double a, double b) const { return seg_quad(a, b).value; }

    // integral of f^{-1/2} s^{1-n} over [a, inf)
    QuadResult tail(double a) const
    {
        const int n = profile_->dimension();
        const auto& p = *profile_;
        auto q = integrate(
            [&](double x) {
                const double s = a / x;
                return std::pow(x, n - 3.0) / std::sqrt(p.f(s));
            },
            0.0, 1.0);
        const double scale = std::pow(a, 2.0 - n);
        q.value *= scale;
        q.error *= scale;
        return q;
    }
};

// Default far radius: 10^3 r0.
inline RadialTriple solve_radial_potential(const WarpProfile& profile, double r_max = 0.0, double tol = 1e-12)
{
    const int n = profile.dimension();
    const double r0 = profile.r0();
    if (r_max == 0.0)
        r_max = 1e3 * r0;
    require(r_max >= 1e3 * r0 * (1.0 - 1e-12), ErrorKind::invalid_parameter, "r_max must be at least 1e3 r0");
    require(tol > 0 && tol < 1e-2, ErrorKind::invalid_parameter, "tolerance out of range");
    if (profile.boundary() == BoundaryKind::horizon)
        require(profile.f_prime(r0) * r0 > 1e-8, ErrorKind::singular_quadrature,
                "horizon zero of f is not simple");

    RadialTriple t;
    t.profile_ = std::make_shared<const WarpProfile>(profile);
    t.tol_ = tol;

    auto& r = t.r_;
    if (profile.boundary() == BoundaryKind::horizon) {
        // w-uniform block on [r0, 2 r0], then geometric.
        const int k1 = 200;
        const double wmax = std::sqrt(r0);
        for (int i = 0; i < k1; ++i) {
            const double w = wmax * double(i) / k1;
            r.push_back(r0 + w * w);
        }
        const double start = 2.0 * r0;
        const int k2 = int(std::ceil(std::log(r_max / start) / std::log(1.01)));
        for (int i = 0; i <= k2; ++i)
            r.push_back(start * std::pow(r_max / start, double(i) / k2));
    } else {
        const int k2 = int(std::ceil(std::log(r_max / r0) / std::log(1.01)));
        for (int i = 0; i <= k2; ++i)
            r.push_back(r0 * std::pow(r_max / r0, double(i) / k2));
    }
    r.front() = r0;
    r.back() = r_max;

    const std::size_t N = r.size();
    t.seg_.assign(N - 1, 0.0);
    double err = 0.0;
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const auto q = t.seg_quad(r[k], r[k + 1]);
        t.seg_[k] = q.value;
        err += q.error;
    }
    const auto tq = t.tail(r_max);
    err += tq.error;

    // Sums from the right keep 1 - u accurate.
    std::vector<double> right(N, 0.0);
    right[N - 1] = tq.value;
    for (std::size_t k = N - 1; k-- > 0;)
        right[k] = right[k + 1] + t.seg_[k];
    const double I = right[0];
    t.C_ = 1.0 / I;

    t.u_.assign(N, 0.0);
    t.v_.assign(N, 0.0);
    double left = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        if (k > 0)
            left += t.seg_[k - 1];
        t.v_[k] = right[k] / I;
        t.u_[k] = left / I;
    }
    t.v_[0] = 1.0;
    t.u_[0] = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        if (t.u_[k] > 0.5)
            t.u_[k] = 1.0 - t.v_[k];
        else
            t.v_[k] = 1.0 - t.u_[k];
    }

    auto& d = t.diag_;
    d.quadrature_error = err;
    d.tail_value = tq.value;
    d.tail_flat_value = std::pow(r_max, 2.0 - n) / (n - 2);
    for (double x : geometric_offsets(1.0, 1e6, 32))
        d.tail_f_deviation = std::max(d.tail_f_deviation, std::abs(profile.f(r_max * x) - 1.0));
    d.normalization_error = err / I;
    d.nodes = N;
    require(d.normalization_error <= tol, ErrorKind::accuracy, "normalization tolerance not reached");

    for (std::size_t k = 1; k < N; ++k)
        require(t.u_[k] > t.u_[k - 1], ErrorKind::accuracy, "tabulated potential is not increasing");

    auto xs = t.r_;
    auto ys = t.u_;
    t.spline_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs),
                                                                                         std::move(ys));
    return t;
}

struct CapacityEstimate {
    double flux_at_boundary = 0;
    double flux_at_infinity = 0;
    double dirichlet_energy = 0;
    double agreed_value = 0;
    double max_rel_spread = 0;
    bool inconsistent = false;
};

// Normalized flux (1/((n-2)|S|)) times the flux of |Du| through {r = a}.
inline double normalized_flux(const RadialTriple& t, double a)
{
    const int n = t.n();
    return t.grad_norm(a) * std::pow(a, n - 1.0) / (n - 2.0);
}

inline CapacityEstimate capacity(const RadialTriple& t)
{
    const int n = t.n();
    const auto& p = t.profile();
    CapacityEstimate c;
    c.flux_at_boundary = normalized_flux(t, t.r0());

    // Centered difference of 1 - u at r_max, converted to |Du| with sqrt(f).
    const double R = t.r_max();
    const double h = 1e-4 * R;
    const double dv = (t.one_minus_u(R - h) - t.one_minus_u(R + h)) / (2.0 * h);
    c.flux_at_infinity = std::sqrt(p.f(R)) * dv * std::pow(R, n - 1.0) / (n - 2.0);

    // Separate double-exponential quadrature of |Du|^2 dmu / |S|.
    const double C = t.flux_constant();
    const double r0 = t.r0();
    auto energy = [&](double w) {
        const double d = w * w;
        const double q = d > 0 ? p.f_gap(d) / d : p.f_prime(r0);
        return 2.0 * C * C * std::pow(r0 + d, 1.0 - n) / std::sqrt(q);
    };
    boost::math::quadrature::exp_sinh<double> es;
    double e;
    if (p.boundary() == BoundaryKind::horizon) {
        e = es.integrate(energy, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
    } else {
        e = es.integrate([&](double s) { return C * C * std::pow(s, 1.0 - n) / std::sqrt(p.f(s)); }, r0,
                         std::numeric_limits<double>::infinity(), 1e-13);
    }
    c.dirichlet_energy = e / (n - 2.0);
    c.agreed_value = c.flux_at_boundary;
    const double v[3] = {c.flux_at_boundary, c.flux_at_infinity, c.dirichlet_energy};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            c.max_rel_spread = std::max(c.max_rel_spread,
                                        std::abs(v[i] - v[j]) / std::max(std::abs(v[i]), std::abs(v[j])));
    c.inconsistent = c.max_rel_spread > 1e-4;
    return c;
}

struct AsymptoticSample {
    double r = 0;
    double value_residual = 0;       // |r^{n-2}(1-u) - C|
    double derivative_residual = 0;  // |r^{n-1} du/dr / (n-2) - C|
};

struct AsymptoticReport {
    std::vector<AsymptoticSample> samples;
    double max_value_residual = 0;
    double max_derivative_residual = 0;
    bool decaying = true;
    // r^{2n} |D2u|^2 at the largest radius, next to the two candidate
    // leading coefficients [(n-1)(n-2)C]^2 and n(n-1)(n-2)^2 C^2.
    double hessian_coefficient_fit = 0;
    double hessian_coefficient_a = 0;
    double hessian_coefficient_b = 0;
};

inline AsymptoticReport asymptotic_expansion_check(const RadialTriple& t, std::span<const double> radii)
{
    const int n = t.n();
    const double cap = t.capacity();
    std::vector<double> rs(radii.begin(), radii.end());
    std::sort(rs.begin(), rs.end());
    AsymptoticReport rep;
    for (double r : rs) {
        AsymptoticSample s;
        s.r = r;
        s.value_residual = std::abs(std::pow(r, n - 2.0) * t.one_minus_u(r) - cap);
        s.derivative_residual = std::abs(std::pow(r, n - 1.0) * t.du_dr(r) / (n - 2.0) - cap);
        if (!rep.samples.empty()) {
            const auto& prev = rep.samples.back();
            const double slack = 1e-12 * cap;
            if (s.value_residual > prev.value_residual + slack ||
                s.derivative_residual > prev.derivative_residual + slack)
                rep.decaying = false;
        }
        rep.max_value_residual = std::max(rep.max_value_residual, s.value_residual);
        rep.max_derivative_residual = std::max(rep.max_derivative_residual, s.derivative_residual);
        rep.samples.push_back(s);
    }
    if (!rs.empty()) {
        const double r = rs.back();
        const auto c = geometry::detail::curvature_closed_form(t.profile(), r, t.flux_constant());
        const double h2 = c.hessian_radial * c.hessian_radial + (n - 1.0) * c.hessian_tangential * c.hessian_tangential;
        rep.hessian_coefficient_fit = std::pow(r, 2.0 * n) * h2;
        rep.hessian_coefficient_a = std::pow((n - 1.0) * (n - 2.0) * cap, 2);
        rep.hessian_coefficient_b = n * (n - 1.0) * std::pow((n - 2.0) * cap, 2);
    }
    return rep;
}

} // namespace substatic::radial
