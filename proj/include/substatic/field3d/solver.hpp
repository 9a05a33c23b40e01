#pragma once

// Capacitary potential of g0 = w^4 delta on a uniform grid over [-L, L]^3.
//
// Delta_{g0} u = w^{-6} d_i (w^2 d_i u), so the discrete operator is the
// conductance Laplacian with face weights w^2 at link midpoints.  Links that
// cross an excised sphere are cut at the sphere (distance theta h) and carry
// the Dirichlet value 0 there, which keeps the matrix symmetric.  The outer
// boundary holds u = (1 - A/|x|)/w; w u is flat-harmonic, so this is exact
// for one center.  A follows from the capacity by superposition of the two
// solves with data 1/w and -1/(|x| w), which is the fixed point of the
// update A <- capacity - M/2.  Each solve is conjugate residuals on the
// Jacobi-scaled matrix, which makes the 2-norm residual monotone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "substatic/error.hpp"
#include "substatic/field3d/conformal_factor.hpp"
#include "substatic/numerics.hpp"

namespace substatic::field3d {

struct GridParams {
    int nodes = 96;        // per axis
    double extent = 4.0;   // half-width L
};

struct SolverOptions {
    double tol = 1e-9;     // on max |Delta_{g0} u| over active nodes
    int max_iterations = 40000;
};

enum class NodeKind : std::uint8_t { active, excised, outer };

struct Grid {
    int n = 0;
    double L = 0;
    double h = 0;

    Grid() = default;
    Grid(int nodes, double extent) : n(nodes), L(extent), h(2.0 * extent / (nodes - 1)) {}

    std::size_t size() const { return std::size_t(n) * n * n; }
    std::size_t index(int i, int j, int k) const { return (std::size_t(k) * n + j) * n + i; }
    double coord(int i) const { return -L + i * h; }
    Point3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
    bool on_face(int i, int j, int k) const
    {
        return i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1;
    }
};

class ScalarField3D {
public:
    const Grid& grid() const noexcept { return grid_; }
    const ConformalFactorSpec& spec() const noexcept { return spec_; }
    const std::vector<double>& values() const noexcept { return u_; }
    const std::vector<NodeKind>& kinds() const noexcept { return kind_; }
    const std::vector<Excision>& excised_regions() const noexcept { return spec_.excisions; }
    double residual_norm() const noexcept { return residual_norm_; }
    double tol() const noexcept { return tol_; }
    const std::vector<double>& residual_history() const noexcept { return history_; }
    const std::vector<double>& residual_history_aux() const noexcept { return history_aux_; }
    int iterations() const noexcept { return iterations_; }
    double closure_constant() const noexcept { return closure_; }
    double capacity() const noexcept { return capacity_; }

    double at(int i, int j, int k) const { return u_[grid_.index(i, j, k)]; }
    NodeKind kind(int i, int j, int k) const { return kind_[grid_.index(i, j, k)]; }
    double w_at(int i, int j, int k) const { return spec_.w(grid_.point(i, j, k)); }

    // Euclidean gradient at a node; one-sided next to excised or face nodes.
    Point3 node_gradient(int i, int j, int k, int stride = 1) const
    {
        Point3 g{};
        const int idx[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
            int p[3] = {i, j, k}, q[3] = {i, j, k};
            p[a] = idx[a] + stride;
            q[a] = idx[a] - stride;
            const bool okp = p[a] < grid_.n && kind(p[0], p[1], p[2]) != NodeKind::excised;
            const bool okq = q[a] >= 0 && kind(q[0], q[1], q[2]) != NodeKind::excised;
            const double c = at(i, j, k);
            if (okp && okq)
                g[a] = (at(p[0], p[1], p[2]) - at(q[0], q[1], q[2])) / (2.0 * stride * grid_.h);
            else if (okp)
                g[a] = (at(p[0], p[1], p[2]) - c) / (stride * grid_.h);
            else if (okq)
                g[a] = (c - at(q[0], q[1], q[2])) / (stride * grid_.h);
        }
        return g;
    }

    // Trilinear interpolation of u and of the nodal gradient.  With stride 2
    // the gradient is built on the sub-lattice of even nodes only.
    double interpolate(const Point3& x) const
    {
        double out = 0;
        trilinear(x, 1, [&](int i, int j, int k, double wgt) { out += wgt * at(i, j, k); });
        return out;
    }

    Point3 gradient(const Point3& x, int stride = 1) const
    {
        Point3 out{};
        trilinear(x, stride, [&](int i, int j, int k, double wgt) {
            const Point3 g = node_gradient(i, j, k, stride);
            for (int a = 0; a < 3; ++a)
                out[a] += wgt * g[a];
        });
        return out;
    }

    // |Du|_{g0} = w^{-2} |grad u|
    double grad_norm_g0(const Point3& x) const
    {
        const double w = spec_.w(x);
        return norm(gradient(x)) / (w * w);
    }

    // Flux of w^2 grad u through the surface of the node box [lo, hi]^3,
    // summed over links leaving the box.  Conserved exactly by the scheme.
    double box_flux(int lo, int hi) const
    {
        require(lo >= 2 && hi <= grid_.n - 3 && lo < hi, ErrorKind::invalid_parameter, "box outside the grid");
        double flux = 0;
        const double h = grid_.h;
        auto link = [&](int i, int j, int k, int a, int dir) {
            int q[3] = {i, j, k};
            q[a] += dir;
            Point3 xm = grid_.point(i, j, k);
            xm[a] += 0.5 * dir * h;
            const double w = spec_.w(xm);
            flux += w * w * (at(q[0], q[1], q[2]) - at(i, j, k)) * h;
        };
        for (int b = lo; b <= hi; ++b)
            for (int c = lo; c <= hi; ++c) {
                link(lo, b, c, 0, -1);
                link(hi, b, c, 0, +1);
                link(b, lo, c, 1, -1);
                link(b, hi, c, 1, +1);
                link(b, c, lo, 2, -1);
                link(b, c, hi, 2, +1);
            }
        return flux;
    }

    // Flux of w^2 grad u through the coordinate sphere |x - center| = rho.
    double sphere_flux(double rho, Point3 center = {0, 0, 0}, int stride = 1) const;

    friend ScalarField3D solve_field(const ConformalFactorSpec&, const GridParams&, const SolverOptions&);
    friend ScalarField3D make_field(Grid, ConformalFactorSpec, std::vector<double>);

private:
    Grid grid_;
    ConformalFactorSpec spec_;
    std::vector<double> u_;
    std::vector<NodeKind> kind_;
    double residual_norm_ = 0;
    double tol_ = 0;
    std::vector<double> history_, history_aux_;
    int iterations_ = 0;
    double closure_ = 0;
    double capacity_ = 0;

    template <class F>
    void trilinear(const Point3& x, int stride, F&& f) const
    {
        int base[3];
        double frac[3];
        const int top = (grid_.n - 1) / stride * stride;
        for (int a = 0; a < 3; ++a) {
            const double s = (x[a] + grid_.L) / grid_.h;
            require(s >= 0 && s <= top, ErrorKind::out_of_domain, "point outside the grid");
            const int b = std::min(int(std::floor(s / stride)) * stride, top - stride);
            base[a] = b;
            frac[a] = (s - b) / stride;
        }
        for (int c = 0; c < 8; ++c) {
            const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
            const double wgt = (di ? frac[0] : 1 - frac[0]) * (dj ? frac[1] : 1 - frac[1]) *
                               (dk ? frac[2] : 1 - frac[2]);
            if (wgt != 0)
                f(base[0] + di * stride, base[1] + dj * stride, base[2] + dk * stride, wgt);
        }
    }
};

namespace detail {

// Fraction of the link x -> x + h e along which the segment first meets an
// excised sphere; 1 if it does not.
inline double cut_fraction(const std::vector<Excision>& ex, const Point3& x, int axis, int dir, double h)
{
    double best = 1.0;
    for (const auto& e : ex) {
        const Point3 d = sub(x, e.center);
        // |d + s dir e_axis|^2 = R^2, s in (0, h]
        const double b = dir * d[axis];
        const double c = dot(d, d) - e.radius * e.radius;
        const double disc = b * b - c;
        if (disc < 0)
            continue;
        const double s = -b - std::sqrt(disc);
        if (s > 0 && s <= h)
            best = std::min(best, s / h);
    }
    return best;
}

struct LinearSystem {
    std::vector<std::uint32_t> node;     // grid index of each unknown
    std::vector<std::int32_t> nb;        // 6 per unknown, -1 if not an unknown
    std::vector<double> c;               // scaled off-diagonal conductances
    std::vector<double> sqrt_diag;
    std::vector<double> inv_w6;
};

struct CrResult {
    std::vector<double> x;  // unscaled solution
    std::vector<double> history;
    int iterations = 0;
    double residual_max = 0;  // max |Delta_{g0}| residual
};

inline CrResult conjugate_residual(const LinearSystem& S, const std::vector<double>& b, double tol, int max_iter)
{
    const std::size_t N = S.node.size();
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t p = 0; p < N; ++p) {
            double s = x[p];
            const std::int32_t* q = &S.nb[6 * p];
            const double* c = &S.c[6 * p];
            for (int d = 0; d < 6; ++d)
                if (q[d] >= 0)
                    s -= c[d] * x[std::size_t(q[d])];
            y[p] = s;
        }
    };
    auto dotv = [&](const std::vector<double>& a, const std::vector<double>& bb) {
        double s = 0;
        for (std::size_t p = 0; p < N; ++p)
            s += a[p] * bb[p];
        return s;
    };
    auto max_res = [&](const std::vector<double>& r) {
        double m = 0;
        for (std::size_t p = 0; p < N; ++p)
            m = std::max(m, std::abs(r[p]) * S.sqrt_diag[p] * S.inv_w6[p]);
        return m;
    };

    std::vector<double> x(N, 0.0), r(N), p(N), Ar(N), Ap(N);
    for (std::size_t i = 0; i < N; ++i)
        r[i] = b[i] / S.sqrt_diag[i];
    p = r;
    apply(r, Ar);
    Ap = Ar;
    double rAr = dotv(r, Ar);

    CrResult out;
    out.history.push_back(std::sqrt(dotv(r, r)));
    int it = 0;
    double m = max_res(r);
    while (m > tol) {
        require(it < max_iter, ErrorKind::convergence, "linear solver hit the iteration cap");
        const double alpha = rAr / dotv(Ap, Ap);
        for (std::size_t i = 0; i < N; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        apply(r, Ar);
        const double rAr_new = dotv(r, Ar);
        const double beta = rAr_new / rAr;
        rAr = rAr_new;
        for (std::size_t i = 0; i < N; ++i) {
            p[i] = r[i] + beta * p[i];
            Ap[i] = Ar[i] + beta * Ap[i];
        }
        ++it;
        out.history.push_back(std::sqrt(dotv(r, r)));
        m = max_res(r);
    }
    for (std::size_t i = 0; i < N; ++i)
        x[i] /= S.sqrt_diag[i];
    out.x = std::move(x);
    out.iterations = it;
    out.residual_max = m;
    return out;
}

} // namespace detail

inline ScalarField3D solve_field(const ConformalFactorSpec& spec, const GridParams& gp = {},
                                 const SolverOptions& opt = {})
{
    spec.validate();
    require(gp.nodes >= 16 && gp.extent > 0, ErrorKind::invalid_parameter, "grid too small");
    require(opt.tol > 0, ErrorKind::invalid_parameter, "tolerance must be positive");
    const Grid G(gp.nodes, gp.extent);
    const double h = G.h;
    for (const auto& e : spec.excisions)
        for (int a = 0; a < 3; ++a)
            require(std::abs(e.center[a]) + e.radius < G.L - 3.0 * h, ErrorKind::invalid_parameter,
                    "excision overlaps the grid boundary");

    ScalarField3D F;
    F.grid_ = G;
    F.spec_ = spec;
    F.tol_ = opt.tol;
    F.kind_.assign(G.size(), NodeKind::active);
    for (int k = 0; k < G.n; ++k)
        for (int j = 0; j < G.n; ++j)
            for (int i = 0; i < G.n; ++i) {
                const Point3 x = G.point(i, j, k);
                NodeKind kd = G.on_face(i, j, k) ? NodeKind::outer : NodeKind::active;
                for (const auto& e : spec.excisions)
                    if (norm(sub(x, e.center)) < e.radius)
                        kd = NodeKind::excised;
                F.kind_[G.index(i, j, k)] = kd;
            }

    detail::LinearSystem S;
    std::vector<std::int32_t> pos(G.size(), -1);
    for (int k = 0; k < G.n; ++k)
        for (int j = 0; j < G.n; ++j)
            for (int i = 0; i < G.n; ++i)
                if (F.kind_[G.index(i, j, k)] == NodeKind::active) {
                    pos[G.index(i, j, k)] = std::int32_t(S.node.size());
                    S.node.push_back(std::uint32_t(G.index(i, j, k)));
                }
    const std::size_t N = S.node.size();
    S.nb.assign(6 * N, -1);
    S.c.assign(6 * N, 0.0);
    std::vector<double> diag(N, 0.0), b0(N, 0.0), b1(N, 0.0);
    S.inv_w6.resize(N);

    auto data0 = [&](const Point3& x) { return 1.0 / spec.w(x); };
    auto data1 = [&](const Point3& x) { return -1.0 / (norm(x) * spec.w(x)); };

    for (std::size_t p = 0; p < N; ++p) {
        const std::size_t gi = S.node[p];
        const int i = int(gi % G.n), j = int((gi / G.n) % G.n), k = int(gi / (std::size_t(G.n) * G.n));
        const Point3 x = G.point(i, j, k);
        const double w = spec.w(x);
        S.inv_w6[p] = 1.0 / std::pow(w, 6);
        for (int d = 0; d < 6; ++d) {
            const int a = d / 2, dir = (d % 2) ? 1 : -1;
            int q[3] = {i, j, k};
            q[a] += dir;
            const std::size_t gq = G.index(q[0], q[1], q[2]);
            const NodeKind kq = F.kind_[gq];
            if (kq == NodeKind::excised) {
                const double theta = std::max(detail::cut_fraction(spec.excisions, x, a, dir, h), 1e-3);
                Point3 xm = x;
                xm[a] += 0.5 * dir * theta * h;
                const double wm = spec.w(xm);
                diag[p] += wm * wm / (theta * h * h);
                continue;
            }
            Point3 xm = x;
            xm[a] += 0.5 * dir * h;
            const double wm = spec.w(xm);
            const double c = wm * wm / (h * h);
            diag[p] += c;
            if (kq == NodeKind::outer) {
                const Point3 xq = G.point(q[0], q[1], q[2]);
                b0[p] += c * data0(xq);
                b1[p] += c * data1(xq);
            } else {
                S.nb[6 * p + d] = pos[gq];
                S.c[6 * p + d] = c;
            }
        }
    }
    S.sqrt_diag.resize(N);
    for (std::size_t p = 0; p < N; ++p)
        S.sqrt_diag[p] = std::sqrt(diag[p]);
    for (std::size_t p = 0; p < N; ++p)
        for (int d = 0; d < 6; ++d)
            if (S.nb[6 * p + d] >= 0)
                S.c[6 * p + d] /= S.sqrt_diag[p] * S.sqrt_diag[std::size_t(S.nb[6 * p + d])];

    const auto s0 = detail::conjugate_residual(S, b0, 0.25 * opt.tol, opt.max_iterations);
    const auto s1 = detail::conjugate_residual(S, b1, 0.25 * opt.tol, opt.max_iterations);

    auto fill = [&](const std::vector<double>& x, auto&& data, std::vector<double>& u) {
        u.assign(G.size(), 0.0);
        for (int k = 0; k < G.n; ++k)
            for (int j = 0; j < G.n; ++j)
                for (int i = 0; i < G.n; ++i)
                    if (F.kind_[G.index(i, j, k)] == NodeKind::outer)
                        u[G.index(i, j, k)] = data(G.point(i, j, k));
        for (std::size_t p = 0; p < N; ++p)
            u[S.node[p]] = x[p];
    };

    // Box halfway between the excisions and the outer faces.
    double reach = 0;
    for (const auto& e : spec.excisions)
        for (int a = 0; a < 3; ++a)
            reach = std::max(reach, std::abs(e.center[a]) + e.radius);
    const int lo_box = std::clamp(int(std::floor((G.L - reach) / h)) / 2, 2, G.n / 2 - 1);
    const int hi_box = G.n - 1 - lo_box;

    std::vector<double> u0, u1;
    fill(s0.x, data0, u0);
    fill(s1.x, data1, u1);
    F.u_ = u0;
    const double f0 = F.box_flux(lo_box, hi_box) / (4.0 * pi);
    F.u_ = u1;
    const double f1 = F.box_flux(lo_box, hi_box) / (4.0 * pi);
    const double A = (f0 - 0.5 * spec.total_mass()) / (1.0 - f1);

    F.u_.resize(G.size());
    for (std::size_t g = 0; g < G.size(); ++g)
        F.u_[g] = u0[g] + A * u1[g];
    F.closure_ = A;
    F.capacity_ = f0 + A * f1;
    F.history_ = s0.history;
    F.history_aux_ = s1.history;
    F.iterations_ = s0.iterations + s1.iterations;

    // Residual of the combined solution, recomputed from scratch.
    double res = 0;
    for (std::size_t p = 0; p < N; ++p) {
        const std::size_t gi = S.node[p];
        double acc = diag[p] * F.u_[gi];
        for (int d = 0; d < 6; ++d)
            if (S.nb[6 * p + d] >= 0) {
                const std::size_t q = std::size_t(S.nb[6 * p + d]);
                acc -= S.c[6 * p + d] * S.sqrt_diag[p] * S.sqrt_diag[q] * F.u_[S.node[q]];
            }
        acc -= b0[p] + A * b1[p];
        res = std::max(res, std::abs(acc) * S.inv_w6[p]);
    }
    F.residual_norm_ = res;
    require(res < opt.tol * (1.0 + std::abs(A)), ErrorKind::convergence, "combined residual above tolerance");
    return F;
}

inline double ScalarField3D::sphere_flux(double rho, Point3 center, int stride) const
{
    // Gauss-Legendre in cos(theta) times the trapezoid rule in the azimuth.
    constexpr int nt = 48, np = 96;
    static const auto gl = [] {
        std::vector<std::pair<double, double>> v;
        for (int i = 0; i < nt; ++i) {
            // Newton iteration for the Legendre roots
            double x = std::cos(pi * (i + 0.75) / (nt + 0.5));
            double dp = 1;
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
    double total = 0;
    for (const auto& [ct, wt] : gl) {
        const double st = std::sqrt(1 - ct * ct);
        for (int j = 0; j < np; ++j) {
            const double ph = 2.0 * pi * j / np;
            const Point3 nrm{st * std::cos(ph), st * std::sin(ph), ct};
            const Point3 x{center[0] + rho * nrm[0], center[1] + rho * nrm[1], center[2] + rho * nrm[2]};
            const double w = spec_.w(x);
            total += wt * (2.0 * pi / np) * rho * rho * w * w * dot(gradient(x, stride), nrm);
        }
    }
    return total;
}

// Rebuild a field from stored node values (snapshot reader).
inline ScalarField3D make_field(Grid g, ConformalFactorSpec spec, std::vector<double> values)
{
    require(values.size() == g.size(), ErrorKind::invalid_parameter, "value count does not match the grid");
    ScalarField3D F;
    F.grid_ = g;
    F.spec_ = std::move(spec);
    F.u_ = std::move(values);
    F.kind_.assign(g.size(), NodeKind::active);
    for (int k = 0; k < g.n; ++k)
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) {
                NodeKind kd = g.on_face(i, j, k) ? NodeKind::outer : NodeKind::active;
                for (const auto& e : F.spec_.excisions)
                    if (norm(sub(g.point(i, j, k), e.center)) < e.radius)
                        kd = NodeKind::excised;
                F.kind_[g.index(i, j, k)] = kd;
            }
    const int lo = std::max(2, g.n / 4);
    F.capacity_ = F.box_flux(lo, g.n - 1 - lo) / (4.0 * pi);
    return F;
}

} // namespace substatic::field3d
