#pragma once

// Level sets of a grid potential: marching tetrahedra (six Kuhn simplices per
// cell) with vertices shared through their grid edge, so the mesh is a
// consistent 2-complex and its components and Euler characteristics can be
// read off directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/field3d/solver.hpp"
#include "substatic/monotone.hpp"

namespace substatic::field3d {

struct LevelVertex {
    Point3 x{};
    double w = 1;
    double grad_norm = 0;  // |Du|_{g0}
};

struct LevelSurface {
    double t = 0;
    std::vector<LevelVertex> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> triangle_area;       // g0 area
    std::vector<double> triangle_grad_norm;  // vertex mean of |Du|_{g0}
    std::vector<int> component;              // per triangle
    int components = 0;
    std::vector<int> euler_characteristic;   // per component
    std::size_t boundary_edges = 0;
    double min_grad_norm = 0;
    double median_grad_norm = 0;
    double grad_margin = 0;                  // min / median
    bool near_critical = false;

    double area() const { return std::accumulate(triangle_area.begin(), triangle_area.end(), 0.0); }
    bool closed() const { return boundary_edges == 0; }
};

inline constexpr double near_critical_fraction = 0.05;

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a)
    {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0;
    auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace detail

inline LevelSurface extract_level(const ScalarField3D& field, double t)
{
    const Grid& G = field.grid();
    const auto& u = field.values();
    const auto& kind = field.kinds();
    double umax = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        umax = std::max(umax, u[i]);
    require(t > 0 && t < umax, ErrorKind::invalid_parameter, "level outside (0, max u)");

    LevelSurface S;
    S.t = t;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    std::vector<Point3> node_grad_cache;

    auto vertex_on = [&](std::size_t a, std::size_t b) {
        if (a > b)
            std::swap(a, b);
        const std::uint64_t key = (std::uint64_t(a) << 32) | std::uint64_t(b);
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end())
            return it->second;
        require(kind[a] != NodeKind::outer && kind[b] != NodeKind::outer, ErrorKind::truncation,
                "level surface reaches the grid boundary");
        auto ijk = [&](std::size_t g) {
            return std::array<int, 3>{int(g % G.n), int((g / G.n) % G.n), int(g / (std::size_t(G.n) * G.n))};
        };
        const auto pa = ijk(a), pb = ijk(b);
        const double s = (t - u[a]) / (u[b] - u[a]);
        const Point3 xa = G.point(pa[0], pa[1], pa[2]), xb = G.point(pb[0], pb[1], pb[2]);
        const Point3 ga = field.node_gradient(pa[0], pa[1], pa[2]);
        const Point3 gb = field.node_gradient(pb[0], pb[1], pb[2]);
        LevelVertex v;
        Point3 g{};
        for (int c = 0; c < 3; ++c) {
            v.x[c] = xa[c] + s * (xb[c] - xa[c]);
            g[c] = ga[c] + s * (gb[c] - ga[c]);
        }
        v.w = field.spec().w(v.x);
        v.grad_norm = norm(g) / (v.w * v.w);
        S.vertices.push_back(v);
        const int id = int(S.vertices.size()) - 1;
        edge_vertex.emplace(key, id);
        return id;
    };

    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k + 1 < G.n; ++k)
        for (int j = 0; j + 1 < G.n; ++j)
            for (int i = 0; i + 1 < G.n; ++i) {
                std::size_t corner[8];
                bool usable = true, below = false, above = false;
                for (int c = 0; c < 8; ++c) {
                    corner[c] = G.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                    usable = usable && kind[corner[c]] != NodeKind::excised;
                    (u[corner[c]] < t ? below : above) = true;
                }
                if (!usable || !below || !above)
                    continue;
                for (const auto& p : perms) {
                    int bits[4] = {0, 1 << p[0], (1 << p[0]) | (1 << p[1]), 7};
                    std::size_t v[4];
                    int inside[4], nin = 0, nout = 0, out_[4];
                    for (int q = 0; q < 4; ++q) {
                        v[q] = corner[bits[q]];
                        if (u[v[q]] < t)
                            inside[nin++] = q;
                        else
                            out_[nout++] = q;
                    }
                    if (nin == 0 || nout == 0)
                        continue;
                    if (nin == 1 || nout == 1) {
                        const int lone = nin == 1 ? inside[0] : out_[0];
                        int tri[3], m = 0;
                        for (int q = 0; q < 4; ++q)
                            if (q != lone)
                                tri[m++] = vertex_on(v[lone], v[q]);
                        S.triangles.push_back({tri[0], tri[1], tri[2]});
                    } else {
                        const int a = vertex_on(v[inside[0]], v[out_[0]]);
                        const int b = vertex_on(v[inside[0]], v[out_[1]]);
                        const int c = vertex_on(v[inside[1]], v[out_[1]]);
                        const int d = vertex_on(v[inside[1]], v[out_[0]]);
                        S.triangles.push_back({a, b, c});
                        S.triangles.push_back({a, c, d});
                    }
                }
            }
    require(!S.triangles.empty(), ErrorKind::invalid_parameter, "empty level set");

    for (const auto& tr : S.triangles) {
        const auto &A = S.vertices[tr[0]], &B = S.vertices[tr[1]], &C = S.vertices[tr[2]];
        const Point3 e1 = sub(B.x, A.x), e2 = sub(C.x, A.x);
        const Point3 cr{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]};
        const double w4 = (std::pow(A.w, 4) + std::pow(B.w, 4) + std::pow(C.w, 4)) / 3.0;
        S.triangle_area.push_back(0.5 * norm(cr) * w4);
        S.triangle_grad_norm.push_back((A.grad_norm + B.grad_norm + C.grad_norm) / 3.0);
    }

    // Topology: components through shared vertices, chi = V - E + F each.
    detail::UnionFind uf(S.vertices.size());
    std::unordered_map<std::uint64_t, int> edge_use;
    for (const auto& tr : S.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = tr[e], b = tr[(e + 1) % 3];
            uf.unite(a, b);
            if (a > b)
                std::swap(a, b);
            ++edge_use[(std::uint64_t(a) << 32) | std::uint64_t(b)];
        }
    std::unordered_map<int, int> label;
    for (std::size_t v = 0; v < S.vertices.size(); ++v)
        label.emplace(uf.find(int(v)), int(label.size()));
    S.components = int(label.size());
    std::vector<long> V(S.components, 0), E(S.components, 0), F(S.components, 0);
    for (std::size_t v = 0; v < S.vertices.size(); ++v)
        ++V[label[uf.find(int(v))]];
    for (const auto& [key, count] : edge_use) {
        ++E[label[uf.find(int(key >> 32))]];
        if (count == 1)
            ++S.boundary_edges;
    }
    for (const auto& tr : S.triangles) {
        const int c = label[uf.find(tr[0])];
        S.component.push_back(c);
        ++F[c];
    }
    for (int c = 0; c < S.components; ++c)
        S.euler_characteristic.push_back(int(V[c] - E[c] + F[c]));

    std::vector<double> g;
    g.reserve(S.vertices.size());
    for (const auto& v : S.vertices)
        g.push_back(v.grad_norm);
    S.min_grad_norm = *std::min_element(g.begin(), g.end());
    S.median_grad_norm = detail::median(g);
    S.grad_margin = S.min_grad_norm / S.median_grad_norm;
    S.near_critical = S.grad_margin < near_critical_fraction;
    return S;
}

inline double level_tau(double t) { return monotone::tau_from_level(t); }

// (1+tau)^{2 beta} * sum over triangles of |Du|^{beta+1} dA_{g0}.
inline double surface_integral_F(const LevelSurface& S, double beta)
{
    double acc = 0;
    for (std::size_t i = 0; i < S.triangles.size(); ++i) {
        const auto& tr = S.triangles[i];
        double g = 0;
        for (int v : tr)
            g += std::pow(S.vertices[v].grad_norm, beta + 1.0);
        acc += S.triangle_area[i] * g / 3.0;
    }
    return std::pow(1.0 + level_tau(S.t), 2.0 * beta) * acc;
}

inline double surface_integral_F(const ScalarField3D& field, double t, double beta)
{
    return surface_integral_F(extract_level(field, t), beta);
}

// Coarea estimate: (1/2 delta) int_{|u - t| < delta} |Du|^{beta+2} dmu_{g0},
// summed over active nodes.  delta defaults to 1.5 h times the mean
// Euclidean gradient on the level.
inline double coarea_integral_F(const ScalarField3D& field, double t, double beta, double delta = 0)
{
    const Grid& G = field.grid();
    if (delta <= 0) {
        const auto S = extract_level(field, t);
        double mean = 0;
        for (const auto& v : S.vertices)
            mean += v.grad_norm * v.w * v.w;
        delta = 1.5 * G.h * mean / double(S.vertices.size());
    }
    require(t - delta > 0, ErrorKind::invalid_parameter, "coarea band leaves (0, 1)");
    double acc = 0;
    const double h3 = G.h * G.h * G.h;
    for (int k = 1; k + 1 < G.n; ++k)
        for (int j = 1; j + 1 < G.n; ++j)
            for (int i = 1; i + 1 < G.n; ++i) {
                const std::size_t g = G.index(i, j, k);
                if (field.kinds()[g] != NodeKind::active)
                    continue;
                const double d = std::abs(field.values()[g] - t);
                if (d >= delta)
                    continue;
                const Point3 x = G.point(i, j, k);
                const double w = field.spec().w(x);
                const double gn = norm(field.node_gradient(i, j, k)) / (w * w);
                acc += h3 * std::pow(w, 6) * (1.0 - d / delta) / delta * std::pow(gn, beta + 2.0);
            }
    return std::pow(1.0 + level_tau(t), 2.0 * beta) * acc;
}

struct LevelSample {
    double t = 0;
    double tau = 0;
    double value = 0;
    int components = 0;
    double grad_margin = 0;
};

struct FieldMonotoneCurve {
    double beta = 0;
    std::vector<LevelSample> samples;
    std::vector<double> skipped_levels;  // near-critical, reported as gaps
    bool truncated = false;              // scan stopped at the grid boundary
    bool theorem_applies = false;        // one center: the Schwarzschild chart
    double max_increase = 0;             // largest relative step up in F along tau
    double relative_spread = 0;          // (max - min) / mean
    double tol = 0.03;
    bool nonincreasing = false;          // informational unless theorem_applies
};

inline FieldMonotoneCurve monotonicity_scan(const ScalarField3D& field, double beta, std::span<const double> levels,
                                            double tol = 0.03)
{
    FieldMonotoneCurve c;
    c.beta = beta;
    c.tol = tol;
    c.theorem_applies = field.spec().centers.size() == 1;
    std::vector<double> ts(levels.begin(), levels.end());
    std::sort(ts.begin(), ts.end());
    for (double t : ts) {
        LevelSurface S;
        try {
            S = extract_level(field, t);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::truncation) {
                c.truncated = true;
                break;
            }
            throw;
        }
        if (S.near_critical) {
            c.skipped_levels.push_back(t);
            continue;
        }
        c.samples.push_back({t, level_tau(t), surface_integral_F(S, beta), S.components, S.grad_margin});
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0;
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const double v = c.samples[i].value;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v;
        if (i > 0)
            c.max_increase = std::max(c.max_increase, (v - c.samples[i - 1].value) / std::abs(c.samples[i - 1].value));
    }
    if (!c.samples.empty()) {
        mean /= double(c.samples.size());
        c.relative_spread = (hi - lo) / std::abs(mean);
    }
    c.nonincreasing = c.max_increase <= tol;
    return c;
}

} // namespace substatic::field3d
