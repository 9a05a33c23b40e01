#pragma once

#include "substatic/field3d/adm.hpp"
#include "substatic/field3d/conformal_factor.hpp"
#include "substatic/field3d/critical.hpp"
#include "substatic/field3d/level_set.hpp"
#include "substatic/field3d/snapshot.hpp"
#include "substatic/field3d/solver.hpp"
#include "substatic/monotone.hpp"

namespace substatic::field3d {

// g0 area of the excised sphere, int w^4 dsigma_e.
inline double excision_area(const ConformalFactorSpec& spec, const Excision& e)
{
    return detail::sphere_quadrature(e.radius, [&](const Point3& x, const Point3&) {
        const Point3 y{x[0] + e.center[0], x[1] + e.center[1], x[2] + e.center[2]};
        return std::pow(spec.w(y), 4);
    });
}

// The grid capacity carries discretization error, hence the looser tolerance.
inline monotone::PenroseReport penrose_check(const ScalarField3D& field, double tol = 0.02)
{
    require(field.excised_regions().size() == 1, ErrorKind::unsupported_configuration,
            "the inequality needs a connected boundary");
    return monotone::make_penrose_report(3, field.capacity(), excision_area(field.spec(), field.excised_regions()[0]),
                                         tol);
}

} // namespace substatic::field3d
