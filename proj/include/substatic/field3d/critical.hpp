#pragma once

// Critical points of a grid potential.  A node is a candidate when |Du| is
// below 5% of the median |Du| among nodes with nearby u and no neighbour in
// the 3x3x3 block has a smaller |Du|.  Candidates within 2h merge.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "substatic/field3d/level_set.hpp"
#include "substatic/field3d/solver.hpp"

namespace substatic::field3d {

struct CriticalPoint {
    Point3 x{};
    double value = 0;       // u at the node
    double grad_norm = 0;   // |Du|_{g0}
    double threshold = 0;   // detection threshold at this u
    Point3 hessian_eigenvalues{};
    int index = 0;          // number of negative eigenvalues
    bool saddle = false;
};

struct CriticalOptions {
    double fraction = 0.05;
    int bins = 100;
    int boundary_margin = 3;  // nodes kept away from the faces and excisions
};

inline std::vector<CriticalPoint> find_critical_points(const ScalarField3D& field, const CriticalOptions& opt = {})
{
    const Grid& G = field.grid();
    const auto& u = field.values();
    const double h = G.h;
    std::vector<double> gn(G.size(), -1.0);
    const int lo = opt.boundary_margin, hi = G.n - 1 - opt.boundary_margin;

    auto eligible = [&](int i, int j, int k) {
        if (i < lo || j < lo || k < lo || i > hi || j > hi || k > hi)
            return false;
        const Point3 x = G.point(i, j, k);
        for (const auto& e : field.excised_regions())
            if (norm(sub(x, e.center)) < e.radius + opt.boundary_margin * h)
                return false;
        return true;
    };

    std::vector<std::vector<double>> bins(opt.bins);
    auto bin_of = [&](double v) { return std::clamp(int(v * opt.bins), 0, opt.bins - 1); };
    for (int k = lo; k <= hi; ++k)
        for (int j = lo; j <= hi; ++j)
            for (int i = lo; i <= hi; ++i) {
                if (!eligible(i, j, k))
                    continue;
                const std::size_t g = G.index(i, j, k);
                const double w = field.spec().w(G.point(i, j, k));
                gn[g] = norm(field.node_gradient(i, j, k)) / (w * w);
                bins[bin_of(u[g])].push_back(gn[g]);
            }
    std::vector<double> med(opt.bins);
    for (int b = 0; b < opt.bins; ++b)
        med[b] = detail::median(bins[b]);

    std::vector<CriticalPoint> found;
    for (int k = lo; k <= hi; ++k)
        for (int j = lo; j <= hi; ++j)
            for (int i = lo; i <= hi; ++i) {
                const std::size_t g = G.index(i, j, k);
                if (gn[g] < 0)
                    continue;
                const double thr = opt.fraction * med[bin_of(u[g])];
                if (!(gn[g] < thr))
                    continue;
                bool local_min = true;
                for (int dk = -1; dk <= 1 && local_min; ++dk)
                    for (int dj = -1; dj <= 1 && local_min; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            const double o = gn[G.index(i + di, j + dj, k + dk)];
                            if ((di || dj || dk) && o >= 0 && o < gn[g]) {
                                local_min = false;
                                break;
                            }
                        }
                if (!local_min)
                    continue;
                const Point3 x = G.point(i, j, k);
                bool merged = false;
                for (auto& c : found)
                    if (norm(sub(c.x, x)) <= 2.0 * h) {
                        if (gn[g] < c.grad_norm) {
                            c.x = x;
                            c.value = u[g];
                            c.grad_norm = gn[g];
                            c.threshold = thr;
                        }
                        merged = true;
                    }
                if (!merged) {
                    CriticalPoint c;
                    c.x = x;
                    c.value = u[g];
                    c.grad_norm = gn[g];
                    c.threshold = thr;
                    found.push_back(c);
                }
            }

    // Euclidean Hessian by central differences; its signature is conformally
    // invariant at a critical point.
    for (auto& c : found) {
        const int i = int(std::lround((c.x[0] + G.L) / h));
        const int j = int(std::lround((c.x[1] + G.L) / h));
        const int k = int(std::lround((c.x[2] + G.L) / h));
        auto U = [&](int a, int b, int d) { return field.at(i + a, j + b, k + d); };
        Eigen::Matrix3d H;
        const double c0 = U(0, 0, 0);
        H(0, 0) = (U(1, 0, 0) - 2 * c0 + U(-1, 0, 0)) / (h * h);
        H(1, 1) = (U(0, 1, 0) - 2 * c0 + U(0, -1, 0)) / (h * h);
        H(2, 2) = (U(0, 0, 1) - 2 * c0 + U(0, 0, -1)) / (h * h);
        H(0, 1) = H(1, 0) = (U(1, 1, 0) - U(1, -1, 0) - U(-1, 1, 0) + U(-1, -1, 0)) / (4 * h * h);
        H(0, 2) = H(2, 0) = (U(1, 0, 1) - U(1, 0, -1) - U(-1, 0, 1) + U(-1, 0, -1)) / (4 * h * h);
        H(1, 2) = H(2, 1) = (U(0, 1, 1) - U(0, 1, -1) - U(0, -1, 1) + U(0, -1, -1)) / (4 * h * h);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
        const auto ev = es.eigenvalues();
        int neg = 0, pos = 0;
        for (int a = 0; a < 3; ++a) {
            c.hessian_eigenvalues[a] = ev(a);
            neg += ev(a) < 0;
            pos += ev(a) > 0;
        }
        c.index = neg;
        c.saddle = neg > 0 && pos > 0;
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    return found;
}

} // namespace substatic::field3d
