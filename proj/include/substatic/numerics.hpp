#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "substatic/error.hpp"

namespace substatic {

constexpr double pi = boost::math::constants::pi<double>();

// |S^{k}| for the unit sphere in R^{k+1}.
inline double sphere_area(int n_minus_1)
{
    const double n = n_minus_1 + 1;
    return 2.0 * std::pow(pi, n / 2.0) / boost::math::tgamma(n / 2.0);
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

// One Gauss-Kronrod 21 panel.  Boost reports |K21 - G10| in units of the
// half-width; rescale it and apply the QUADPACK sharpening, since that
// difference bounds the Gauss error rather than the Kronrod one.
template <class F>
QuadResult gk_panel(F& f, double a, double b)
{
    QuadResult r;
    double raw = 0.0;
    r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &raw);
    raw *= 0.5 * std::abs(b - a);
    const double mag = std::abs(r.value);
    if (mag > 0)
        r.error = std::max(mag * std::min(1.0, std::pow(200.0 * raw / mag, 1.5)),
                           std::numeric_limits<double>::epsilon() * mag);
    else
        r.error = raw;
    return r;
}

template <class F>
QuadResult gk_adapt(F& f, double a, double b, double abs_tol, unsigned depth)
{
    QuadResult r = gk_panel(f, a, b);
    if (r.error <= abs_tol || depth == 0)
        return r;
    const double mid = 0.5 * (a + b);
    QuadResult lo = gk_adapt(f, a, mid, 0.5 * abs_tol, depth - 1);
    QuadResult hi = gk_adapt(f, mid, b, 0.5 * abs_tol, depth - 1);
    return {lo.value + hi.value, lo.error + hi.error};
}

} // namespace detail

// Adaptive Gauss-Kronrod on a finite interval; the tolerance is relative to
// a first coarse estimate of the integral.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-14, unsigned max_depth = 20)
{
    if (a == b)
        return {};
    const QuadResult first = detail::gk_panel(f, a, b);
    if (!std::isfinite(first.value))
        fail(ErrorKind::accuracy, "quadrature produced a non-finite value");
    if (first.error <= rel_tol * std::abs(first.value))
        return first;
    const double mid = 0.5 * (a + b);
    const double tol = rel_tol * std::abs(first.value);
    QuadResult lo = detail::gk_adapt(f, a, mid, 0.5 * tol, max_depth);
    QuadResult hi = detail::gk_adapt(f, mid, b, 0.5 * tol, max_depth);
    QuadResult r{lo.value + hi.value, lo.error + hi.error};
    if (!std::isfinite(r.value))
        fail(ErrorKind::accuracy, "quadrature produced a non-finite value");
    return r;
}

// Composite Simpson over [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels)
{
    require(panels >= 2 && panels % 2 == 0, ErrorKind::invalid_parameter,
            "simpson needs an even panel count");
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

inline std::vector<double> geometric_offsets(double lo, double hi, std::size_t count)
{
    require(lo > 0 && hi > lo && count >= 2, ErrorKind::invalid_parameter, "bad geometric grid");
    std::vector<double> out(count);
    const double q = std::log(hi / lo) / double(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo * std::exp(q * double(i));
    out.back() = hi;
    return out;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    require(count >= 2, ErrorKind::invalid_parameter, "linspace needs two points");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * double(i) / double(count - 1);
    out.back() = hi;
    return out;
}

} // namespace substatic
