#pragma once

// Conformally flat data g0 = w^4 delta in three dimensions,
// w(x) = 1 + sum_i m_i / (2|x - x_i|).

#include <array>
#include <cmath>
#include <vector>

#include "substatic/error.hpp"

namespace substatic::field3d {

using Point3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline double dot(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

struct Excision {
    Point3 center{};
    double radius = 0;
};

struct ConformalFactorSpec {
    std::vector<Point3> centers;
    std::vector<double> masses;
    std::vector<Excision> excisions;

    void validate() const
    {
        require(centers.size() == masses.size(), ErrorKind::invalid_parameter, "one mass per center");
        for (double m : masses)
            require(m > 0 && std::isfinite(m), ErrorKind::invalid_parameter, "masses must be positive");
        require(!excisions.empty(), ErrorKind::invalid_parameter, "at least one excised region is needed");
        for (const auto& e : excisions)
            require(e.radius > 0, ErrorKind::invalid_parameter, "excision radius must be positive");
        for (std::size_t i = 0; i < excisions.size(); ++i)
            for (std::size_t j = i + 1; j < excisions.size(); ++j)
                require(norm(sub(excisions[i].center, excisions[j].center)) >
                            excisions[i].radius + excisions[j].radius,
                        ErrorKind::invalid_parameter, "excisions overlap");
        // every pole of w must be hidden inside an excision
        for (const auto& c : centers) {
            bool covered = false;
            for (const auto& e : excisions)
                covered = covered || norm(sub(c, e.center)) < e.radius;
            require(covered, ErrorKind::invalid_parameter, "each center must lie inside an excision");
        }
    }

    double total_mass() const
    {
        double s = 0;
        for (double m : masses)
            s += m;
        return s;
    }

    double w(const Point3& x) const
    {
        double s = 1.0;
        for (std::size_t i = 0; i < centers.size(); ++i)
            s += masses[i] / (2.0 * norm(sub(x, centers[i])));
        return s;
    }

    Point3 grad_w(const Point3& x) const
    {
        Point3 g{};
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const Point3 d = sub(x, centers[i]);
            const double r = norm(d);
            const double c = -masses[i] / (2.0 * r * r * r);
            for (int a = 0; a < 3; ++a)
                g[a] += c * d[a];
        }
        return g;
    }

    Mat3 hess_w(const Point3& x) const
    {
        Mat3 h{};
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const Point3 d = sub(x, centers[i]);
            const double r = norm(d);
            const double r3 = r * r * r;
            const double r5 = r3 * r * r;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    h[a][b] += 0.5 * masses[i] * (3.0 * d[a] * d[b] / r5 - (a == b ? 1.0 / r3 : 0.0));
        }
        return h;
    }
};

// Isotropic Schwarzschild: horizon at |x| = m/2.
inline ConformalFactorSpec single_center(double m, Point3 c = {0, 0, 0})
{
    ConformalFactorSpec s{{c}, {m}, {{c, 0.5 * m}}};
    s.validate();
    return s;
}

// Two holes on the x axis at +-separation/2.
inline ConformalFactorSpec two_center(double m1, double m2, double separation, double excision_radius)
{
    const Point3 a{-0.5 * separation, 0, 0}, b{0.5 * separation, 0, 0};
    ConformalFactorSpec s{{a, b}, {m1, m2}, {{a, excision_radius}, {b, excision_radius}}};
    s.validate();
    return s;
}

// w = 1 around one excised ball.
inline ConformalFactorSpec flat_excision(double radius = 1.0, Point3 c = {0, 0, 0})
{
    ConformalFactorSpec s{{}, {}, {{c, radius}}};
    s.validate();
    return s;
}

} // namespace substatic::field3d
