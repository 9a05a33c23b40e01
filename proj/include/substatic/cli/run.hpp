#pragma once

// Subcommand dispatch.  Every command fills a ResultBundle; nothing here
// writes files (see emit in bundle.hpp).

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "substatic/cli/bundle.hpp"
#include "substatic/cli/config.hpp"
#include "substatic/conformal.hpp"
#include "substatic/field3d.hpp"
#include "substatic/geometry.hpp"
#include "substatic/monotone.hpp"
#include "substatic/radial.hpp"

namespace substatic::cli {

namespace detail {

inline geometry::WarpProfile make_profile(const ExperimentConfig& c)
{
    const geometry::Dimension n(c.n);
    if (c.profile == "schwarzschild")
        return geometry::schwarzschild_profile(n, c.m);
    if (c.profile == "reissner-nordstrom")
        return geometry::reissner_nordstrom_profile(n, c.m, c.q);
    return geometry::flat_exterior_profile(n, c.r0);
}

inline radial::RadialTriple make_triple(const ExperimentConfig& c)
{
    return radial::solve_radial_potential(make_profile(c), c.r_max, c.tol);
}

inline bool is_substatic(const radial::RadialTriple& tr)
{
    const auto rs = monotone::substatic_samples(tr);
    return geometry::substatic_check(tr, rs).is_substatic;
}

inline VerdictKind theorem_if(bool applies) { return applies ? VerdictKind::theorem : VerdictKind::informational; }

inline std::string beta_tag(double b)
{
    std::ostringstream s;
    s << b;
    return s.str();
}

inline field3d::ConformalFactorSpec make_spec(const ExperimentConfig& c)
{
    using namespace field3d;
    if (c.configuration == "single-center") {
        const double R = c.excision_radius > 0 ? c.excision_radius : 0.5 * c.field_m;
        ConformalFactorSpec s{{{0, 0, 0}}, {c.field_m}, {{{0, 0, 0}, R}}};
        s.validate();
        return s;
    }
    if (c.configuration == "two-center")
        return two_center(c.m1, c.m2, c.separation, c.excision_radius > 0 ? c.excision_radius : 0.25);
    return flat_excision(c.excision_radius > 0 ? c.excision_radius : 1.0);
}

inline field3d::GridParams make_grid(const ExperimentConfig& c)
{
    const double L = c.extent > 0 ? c.extent : (c.configuration == "two-center" ? 5.0 : 4.0);
    return {c.nodes, L};
}

inline void triple_report(ResultBundle& b, const radial::RadialTriple& tr)
{
    auto& r = b.report("triple");
    r.set("label", tr.label());
    r.set("n", (long long)tr.n());
    r.set("r0", tr.r0());
    r.set("r_max", tr.r_max());
    r.set("flux_constant", tr.flux_constant());
    r.set("capacity", tr.capacity());
    r.set("normalization_error", tr.diagnostics().normalization_error);
    r.set("tail_f_deviation", tr.diagnostics().tail_f_deviation);
    r.set("nodes", (long long)tr.diagnostics().nodes);
}

inline void penrose_into(ResultBundle& b, const monotone::PenroseReport& p, bool substatic, bool schwarzschild)
{
    auto& r = b.report("penrose");
    r.set("capacity", p.capacity);
    r.set("area", p.boundary_area);
    r.set("rhs", p.rhs);
    r.set("margin", p.margin);
    r.set("tol", p.tol);
    r.set("equality", std::string(p.equality ? "true" : "false"));
    b.verdict("penrose.margin", "capacity >= (|boundary| / |S^{n-1}|)^{(n-2)/(n-1)} / 2 on sub-static triples",
              theorem_if(substatic), p.margin, -p.tol, p.margin >= -p.tol);
    if (schwarzschild)
        b.verdict("penrose.equality", "equality on Schwarzschild", VerdictKind::theorem, std::abs(p.margin), p.tol,
                  p.equality);
}

} // namespace detail

inline void run_schwarzschild(const ExperimentConfig& c, ResultBundle& b)
{
    const geometry::Dimension n(c.n);
    const auto prof = geometry::schwarzschild_profile(n, c.m);
    const auto tr = radial::solve_radial_potential(prof, c.r_max, c.tol);
    detail::triple_report(b, tr);
    auto& t = b.table("schwarzschild", {"r", "u", "u_exact", "abs_error"});
    double worst = 0;
    for (double x : geometric_offsets(1e-8, tr.r_max() / tr.r0() - 1.0, 400)) {
        const double r = std::min(tr.r0() * (1.0 + x), tr.r_max());
        const double exact = std::sqrt(prof.f_gap(r - tr.r0()));
        const double u = tr.u(r);
        worst = std::max(worst, std::abs(u - exact));
        t.add({r, u, exact, std::abs(u - exact)});
    }
    b.verdict("schwarzschild.oracle", "max |u - sqrt(1 - 2m r^{2-n})| over [r0, r_max]", VerdictKind::numerical,
              worst, 1e-8, worst < 1e-8);
    const auto cap = radial::capacity(tr);
    b.verdict("schwarzschild.capacity", "capacity equals the mass", VerdictKind::numerical,
              std::abs(cap.agreed_value - c.m), 1e-6, std::abs(cap.agreed_value - c.m) <= 1e-6);
    b.verdict("schwarzschild.capacity_spread", "flux, infinity and energy capacities agree", VerdictKind::numerical,
              cap.max_rel_spread, 1e-4, cap.max_rel_spread <= 1e-4);
    detail::penrose_into(b, monotone::penrose_check(tr), true, true);
}

inline void run_radial(const ExperimentConfig& c, ResultBundle& b)
{
    const auto tr = detail::make_triple(c);
    detail::triple_report(b, tr);
    auto& t = b.table("radial", {"r", "u", "one_minus_u", "grad_norm"});
    bool increasing = true;
    double prev = -1;
    for (double x : geometric_offsets(1e-8, tr.r_max() / tr.r0() - 1.0, 400)) {
        const double r = std::min(tr.r0() * (1.0 + x), tr.r_max());
        const auto [u, v] = tr.eval(r);
        increasing = increasing && u > prev && u >= 0 && u < 1;
        prev = u;
        t.add({r, u, v, tr.grad_norm(r)});
    }
    b.verdict("radial.monotone_u", "0 <= u < 1 and u strictly increasing", VerdictKind::numerical,
              increasing ? 1.0 : 0.0, 1.0, increasing);

    const auto cap = radial::capacity(tr);
    auto& rc = b.report("capacity");
    rc.set("flux_at_boundary", cap.flux_at_boundary);
    rc.set("flux_at_infinity", cap.flux_at_infinity);
    rc.set("dirichlet_energy", cap.dirichlet_energy);
    rc.set("agreed_value", cap.agreed_value);
    rc.set("max_rel_spread", cap.max_rel_spread);
    b.verdict("radial.capacity_spread", "flux, infinity and energy capacities agree", VerdictKind::numerical,
              cap.max_rel_spread, 1e-4, cap.max_rel_spread <= 1e-4);

    const auto rs = monotone::substatic_samples(tr);
    const auto ss = geometry::substatic_check(tr, rs);
    auto& rss = b.report("substatic");
    rss.set("global_min", ss.global_min);
    rss.set("tol", ss.tol);
    rss.set("is_substatic", std::string(ss.is_substatic ? "true" : "false"));
    b.verdict("radial.substatic", "u Ric - D2u >= 0", VerdictKind::informational, ss.global_min, -ss.tol,
              ss.is_substatic);

    std::vector<double> radii;
    for (double k : {10.0, 30.0, 100.0, 300.0, 1000.0})
        if (k * tr.r0() <= tr.r_max())
            radii.push_back(k * tr.r0());
    const auto as = radial::asymptotic_expansion_check(tr, radii);
    auto& ra = b.report("asymptotics");
    ra.set("max_value_residual", as.max_value_residual);
    ra.set("max_derivative_residual", as.max_derivative_residual);
    ra.set("decaying", std::string(as.decaying ? "true" : "false"));
    ra.set("hessian_coefficient_fit", as.hessian_coefficient_fit);
    ra.set("hessian_coefficient_a", as.hessian_coefficient_a);
    ra.set("hessian_coefficient_b", as.hessian_coefficient_b);
    b.verdict("radial.asymptotic_decay", "r^{n-2}(1-u) - C decays", VerdictKind::numerical,
              as.max_value_residual, 0, as.decaying);
}

inline void run_monotone(const ExperimentConfig& c, ResultBundle& b)
{
    const auto tr = detail::make_triple(c);
    detail::triple_report(b, tr);
    const int n = tr.n();
    std::vector<double> taus{1.0};
    for (double t : monotone::default_tau_grid(std::size_t(c.tau_count), c.tau_min_offset, c.tau_max_offset))
        taus.push_back(t);
    auto& t = b.table("monotone", {"beta", "tau", "t", "F", "dF_analytic", "dF_fd", "flags"});
    for (double beta : c.monotone_betas) {
        const auto curve = monotone::monotone_curve(tr, beta, taus);
        std::string base = curve.theorem_applies ? "theorem" : "informational";
        if (curve.below_threshold)
            base += "|below-threshold";
        if (!curve.substatic)
            base += "|not-substatic";
        double worst = 0;
        for (const auto& s : curve.samples) {
            std::string flags = base + (s.x == 1.0 ? "|boundary" : "");
            t.add({beta, s.x, s.t, s.value, s.analytic_derivative, s.fd_derivative, flags});
            if (s.x > 1.0) {
                // F' blows up like (tau-1)^{-1/2} when F is not constant, so the
                // difference quotient's own truncation error joins the allowance.
                const double h = monotone::fd_step(s.x);
                const double fd2 = (monotone::F_beta(tr, beta, s.x + 2 * h) - monotone::F_beta(tr, beta, s.x - 2 * h)) /
                                   (4 * h);
                const double allow = std::max(1e-6, 1e-4 * std::abs(s.value)) + std::abs(fd2 - s.fd_derivative);
                worst = std::max(worst, std::abs(s.analytic_derivative - s.fd_derivative) / allow);
            }
        }
        const std::string tag = "monotone.beta" + detail::beta_tag(beta);
        b.verdict(tag + ".nonincreasing", "dF/dtau <= 0 (finite differences)", detail::theorem_if(curve.theorem_applies),
                  curve.max_fd_derivative, curve.verdict_tol, curve.nonincreasing);
        b.verdict(tag + ".convex", "second differences of F >= 0", detail::theorem_if(curve.theorem_applies),
                  curve.min_second_difference, -curve.verdict_tol, curve.convex);
        b.verdict(tag + ".derivative", "analytic F' against finite differences, in units of max(1e-6, 1e-4|F|) + |fd(h) - fd(2h)|",
                  VerdictKind::numerical, worst, 1.0, worst <= 1.0);

        double worst2 = 0;
        for (double tau : {1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0}) {
            const double F = monotone::F_beta(tr, beta, tau);
            const double a = monotone::F_beta_second_analytic(tr, beta, tau);
            const double fd = monotone::F_beta_fd_second(tr, beta, tau);
            worst2 = std::max(worst2, std::abs(a - fd) / std::max(1e-5, 1e-3 * std::abs(F)));
        }
        b.verdict(tag + ".second_derivative", "analytic F'' against finite differences, in units of max(1e-5, 1e-3|F|)",
                  VerdictKind::numerical, worst2, 1.0, worst2 <= 1.0);

        const double F1 = monotone::F_beta(tr, beta, 1.0);
        const double F1c = monotone::F_beta_at_one_closed_form(n, beta, tr.capacity(),
                                                               sphere_area(n - 1) * std::pow(tr.r0(), n - 1.0));
        b.verdict(tag + ".boundary_value", "F(1) against its closed form (relative)", VerdictKind::numerical,
                  std::abs(F1 - F1c) / std::abs(F1c), 1e-8, std::abs(F1 - F1c) <= 1e-8 * std::abs(F1c));
        try {
            const auto lim = monotone::limit_F(tr, beta);
            auto& r = b.report("limit.beta" + detail::beta_tag(beta));
            r.set("limit", lim.limit);
            r.set("F_at_1000", lim.F_at_1000);
            r.set("rel_diff", lim.rel_diff);
            b.verdict(tag + ".limit", "F(1e3) within 1% of the limit", VerdictKind::numerical, lim.rel_diff, 0.01,
                      lim.within_one_percent);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::truncation_domain)
                throw;
            b.verdict(tag + ".limit", std::string("limit check skipped: ") + e.what(), VerdictKind::informational, 0,
                      0.01, false);
        }
    }
}

inline void run_penrose(const ExperimentConfig& c, ResultBundle& b)
{
    const auto tr = detail::make_triple(c);
    detail::triple_report(b, tr);
    const bool ss = detail::is_substatic(tr);
    b.report("substatic").set("is_substatic", std::string(ss ? "true" : "false"));
    detail::penrose_into(b, monotone::penrose_check(tr), ss, c.profile == "schwarzschild");
}

inline void run_conformal_check(const ExperimentConfig& c, ResultBundle& b)
{
    const auto tr = detail::make_triple(c);
    detail::triple_report(b, tr);
    const int n = tr.n();
    const bool ss = detail::is_substatic(tr);
    const bool schw = c.profile == "schwarzschild";
    std::mt19937_64 rng(c.seed);
    // Offsets start at 1e-4 r0 (phi of order 1e-2); closer in, the 1/sinh(phi)
    // factors lift roundoff in Q above the 1e-9 sign tolerance.
    std::uniform_real_distribution<double> logx(std::log(1e-4), std::log(tr.r_max() / tr.r0() - 1.0));
    std::vector<double> rs(std::size_t(c.conformal_samples));
    for (auto& r : rs)
        r = std::min(tr.r0() * (1.0 + std::exp(logx(rng))), tr.r_max());

    auto& t = b.table("conformal", {"r", "u", "phi", "grad_phi", "hess_phi2", "kato_margin"});
    double star = 0, grad_dev = 0, hess = 0, kato = std::numeric_limits<double>::infinity();
    std::map<double, double> divy;
    for (double beta : c.conformal_betas)
        divy[beta] = std::numeric_limits<double>::infinity();
    const double grad_exact = (n - 2.0) * std::pow(2.0 * c.m, -1.0 / (n - 2.0));
    for (double r : rs) {
        const auto st = conformal::conformal_state(tr, r);
        const double a = st.one_minus_u * (2.0 - st.one_minus_u);
        const double G = tr.grad_norm(r);
        const double rhs = 4.0 * G * G * std::pow(a, -2.0 * (n - 1.0) / (n - 2.0));
        star = std::max(star, std::abs(st.grad_phi_norm * st.grad_phi_norm - rhs) / rhs);
        grad_dev = std::max(grad_dev, std::abs(st.grad_phi_norm - grad_exact));
        hess = std::max(hess, std::abs(st.hess_phi_norm2));
        const double km = conformal::kato_check(st);
        kato = std::min(kato, km);
        for (auto& [beta, v] : divy)
            v = std::min(v, conformal::divY_integrand(st, beta));
        t.add({r, st.u, st.phi, st.grad_phi_norm, st.hess_phi_norm2, km});
    }
    b.verdict("conformal.star", "|grad phi|^2 = 4|Du|^2 (1-u^2)^{-2(n-1)/(n-2)} (relative)", VerdictKind::numerical,
              star, 1e-10, star <= 1e-10);
    b.verdict("conformal.kato", "refined Kato margin >= 0", VerdictKind::theorem, kato, -1e-10, kato >= -1e-10);
    if (schw) {
        b.verdict("conformal.grad_phi", "|grad phi|_g = (n-2)(2m)^{-1/(n-2)} on Schwarzschild", VerdictKind::numerical,
                  grad_dev, 1e-8, grad_dev <= 1e-8);
        b.verdict("conformal.hess_phi", "|hess phi|^2_g = 0 on Schwarzschild", VerdictKind::numerical, hess, 1e-9,
                  hess <= 1e-9);
    }
    for (const auto& [beta, v] : divy) {
        const bool applies = ss && beta >= monotone::threshold(n);
        b.verdict("conformal.divY.beta" + detail::beta_tag(beta), "div Y_beta >= 0 on sub-static triples",
                  detail::theorem_if(applies), v, -1e-9, v >= -1e-9);
    }

    const auto cyl = conformal::cylinder_limit_check(tr);
    auto& rc = b.report("cylinder");
    rc.set("s_max", cyl.s_max);
    rc.set("sup_grad_phi", cyl.sup_grad_phi);
    rc.set("sup_hess_phi", cyl.sup_hess_phi);
    rc.set("sup_area", cyl.sup_area);
    rc.set("grad_phi_norm2_far", cyl.grad_phi_norm2_far);
    rc.set("grad_phi_norm2_limit", cyl.grad_phi_norm2_limit);
    rc.set("area_far", cyl.area_far);
    rc.set("area_limit", cyl.area_limit);
    rc.set("hess_phi_norm2_far", cyl.hess_phi_norm2_far);
    rc.set("hess_phi_norm2_stated", cyl.hess_phi_norm2_stated);
    rc.set("stated_limit_discrepancy", std::string(cyl.stated_limit_discrepancy ? "true" : "false"));
    const double dev = std::abs(cyl.grad_phi_norm2_far - cyl.grad_phi_norm2_limit) / cyl.grad_phi_norm2_limit;
    b.verdict("conformal.cylinder_limit", "|grad phi|^2_g tends to (2C)^{-2/(n-2)}(n-2)^2", VerdictKind::numerical, dev,
              1e-3, dev <= 1e-3);
}

inline void run_identity(const ExperimentConfig& c, ResultBundle& b)
{
    const auto tr = detail::make_triple(c);
    detail::triple_report(b, tr);
    const int n = tr.n();
    const bool ss = detail::is_substatic(tr);
    const double s_high = std::min(c.s_high, 0.9 * conformal::max_s(tr));
    const std::vector<std::string> cols{"s_low", "s_high", "lhs", "rhs", "residual", "relative_residual"};
    auto emit_residual = [&](const std::string& name, const std::string& what, double beta, auto&& fn) {
        const auto r1 = fn(c.panels);
        const auto r2 = fn(2 * c.panels);
        auto& t = b.table(name, cols);
        for (const auto& r : {r1, r2})
            t.add({r.s_low, r.s_high, r.lhs_boundary, r.rhs_volume, r.residual, r.relative_residual});
        const std::string tag = name;
        b.verdict(tag + ".residual", what + " relative residual at default panels", VerdictKind::numerical,
                  r1.relative_residual, 1e-5, r1.relative_residual < 1e-5);
        // Refinement must at least halve the residual unless it is already at roundoff.
        const double scale = 1e8 * conformal::boundary_scale(tr, beta, c.s_low);
        const bool floor = r1.residual <= 1e-12 * scale;
        const double ratio = r1.residual > 0 ? r2.residual / r1.residual : 0.0;
        b.verdict(tag + ".refinement", what + " residual ratio under panel doubling", VerdictKind::numerical, ratio,
                  0.5, floor || ratio <= 0.5);
        (void)beta;
    };
    for (double beta : c.identity_betas) {
        const std::string bt = detail::beta_tag(beta);
        if (beta > monotone::threshold(n))
            emit_residual("identity_beta" + bt, "integral identity", beta, [&](int p) {
                return conformal::integral_identity_residual(tr, beta, c.s_low, s_high, p);
            });
        emit_residual("quotient_beta" + bt, "X_beta identity", beta, [&](int p) {
            return conformal::quotient_identity_residual(tr, beta, c.s_low, s_high, p);
        });

        auto& t = b.table("phi_beta" + bt, {"s", "Phi", "Phi_prime", "Phi_fd", "quotient"});
        double worst = 0, worst_drop = 0, prev_q = -std::numeric_limits<double>::infinity();
        for (double s : linspace(c.s_low, s_high, 21)) {
            const double P = conformal::Phi_beta(tr, beta, s);
            const double dP = conformal::Phi_beta_prime(tr, beta, s);
            const double fd = conformal::Phi_beta_fd(tr, beta, s);
            const double q = dP / std::sinh(s);
            worst = std::max(worst, std::abs(dP - fd) / std::max(1e-6, 1e-3 * std::abs(P)));
            worst_drop = std::max(worst_drop, prev_q - q);
            prev_q = q;
            t.add({s, P, dP, fd, q});
        }
        b.verdict("phi_beta" + bt + ".derivative", "Phi' = -beta sinh(s) Psi against finite differences",
                  VerdictKind::numerical, worst, 1.0, worst <= 1.0);
        const bool applies = ss && beta >= monotone::threshold(n);
        b.verdict("phi_beta" + bt + ".quotient", "Phi'(s)/sinh(s) nondecreasing", detail::theorem_if(applies),
                  worst_drop, 1e-8, worst_drop <= 1e-8);
    }
}

inline void run_field3d(const ExperimentConfig& c, ResultBundle& b)
{
    using namespace field3d;
    const auto spec = detail::make_spec(c);
    const auto F = solve_field(spec, detail::make_grid(c), {c.field_tol});
    const Grid& G = F.grid();
    const double M = spec.total_mass();
    auto& r = b.report("field3d");
    r.set("configuration", c.configuration);
    r.set("nodes", (long long)G.n);
    r.set("extent", G.L);
    r.set("spacing", G.h);
    r.set("iterations", (long long)F.iterations());
    r.set("residual_norm", F.residual_norm());
    r.set("closure_constant", F.closure_constant());
    r.set("capacity", F.capacity());
    b.verdict("field3d.residual", "max |Delta_g0 u| below the solver tolerance", VerdictKind::numerical,
              F.residual_norm(), F.tol() * (1.0 + std::abs(F.closure_constant())),
              F.residual_norm() < F.tol() * (1.0 + std::abs(F.closure_constant())));

    // Flux through three enclosing spheres.  A second solve on a grid of
    // two thirds the resolution gives the Richardson error of each flux.
    double reach = 0;
    for (const auto& e : spec.excisions)
        reach = std::max(reach, norm(e.center) + e.radius);
    const double rho_hi = G.L - 3.0 * G.h;
    auto coarse_grid = detail::make_grid(c);
    coarse_grid.nodes = (2 * coarse_grid.nodes + 2) / 3;
    const auto Fc = solve_field(spec, coarse_grid, {c.field_tol});
    const double refine = std::pow(Fc.grid().h / G.h, 2) - 1.0;
    auto& tf = b.table("field3d_flux", {"radius", "flux", "flux_coarse", "discretization"});
    double flux_lo = 1e300, flux_hi = -1e300, worst_est = 0;
    for (double f : {0.4, 0.6, 0.8}) {
        const double rho = reach + f * (rho_hi - reach);
        const double a = F.sphere_flux(rho) / (4.0 * pi);
        const double a2 = Fc.sphere_flux(rho) / (4.0 * pi);
        const double est = std::abs(a - a2) / refine;
        tf.add({rho, a, a2, est});
        flux_lo = std::min(flux_lo, a);
        flux_hi = std::max(flux_hi, a);
        worst_est = std::max(worst_est, est);
    }
    const double flux_ratio = (flux_hi - flux_lo) / std::max(2.0 * worst_est, 1e-12);
    r.set("sphere_flux_spread", flux_hi - flux_lo);
    r.set("sphere_flux_discretization", worst_est);
    b.verdict("field3d.flux_conservation", "sphere fluxes at three radii agree within 2x the discretization estimate",
              VerdictKind::numerical, flux_ratio, 1.0, flux_ratio <= 1.0);

    const bool one_center = spec.centers.size() == 1;
    const bool flat = spec.centers.empty();
    if (one_center || flat) {
        const double expected = flat ? spec.excisions[0].radius : M;
        const double tol = flat ? 0.01 : 0.02;
        const double dev = std::abs(F.capacity() - expected) / expected;
        b.verdict("field3d.capacity", flat ? "capacity of a flat ball equals its radius" : "capacity equals the mass",
                  VerdictKind::numerical, dev, tol, dev <= tol);
        // Discrete maximum principle along the coordinate axes.
        bool rays_ok = true;
        const int mid = G.n / 2;
        for (int a = 0; a < 3; ++a)
            for (int dir : {-1, 1}) {
                double prev = -1;
                for (int s = 0; s <= mid; ++s) {
                    int idx[3] = {mid, mid, mid};
                    idx[a] = mid + dir * s;
                    if (idx[a] < 0 || idx[a] >= G.n || F.kind(idx[0], idx[1], idx[2]) != NodeKind::active)
                        continue;
                    const double u = F.at(idx[0], idx[1], idx[2]);
                    rays_ok = rays_ok && u > prev && u >= 0 && u < 1;
                    prev = u;
                }
            }
        b.verdict("field3d.maximum_principle", "u increases along axes away from the excision", VerdictKind::numerical,
                  rays_ok ? 1.0 : 0.0, 1.0, rays_ok);
    }

    auto& tl = b.table("field3d_levels",
                       {"beta", "t", "tau", "F_surface", "F_coarea", "components", "euler", "grad_margin", "flags"});
    bool closed = true;
    double worst_coarea = 0;
    std::vector<double> levels = c.levels;
    for (double beta : c.field_betas) {
        const auto scan = monotonicity_scan(F, beta, levels);
        for (const auto& s : scan.samples) {
            const auto S = extract_level(F, s.t);
            const double co = coarea_integral_F(F, s.t, beta);
            worst_coarea = std::max(worst_coarea, std::abs(co - s.value) / std::abs(s.value));
            std::string eul;
            for (int e : S.euler_characteristic) {
                eul += (eul.empty() ? "" : "|") + std::to_string(e);
                closed = closed && (!one_center || e == 2);
            }
            closed = closed && S.closed();
            tl.add({beta, s.t, s.tau, s.value, co, (long long)s.components, eul, s.grad_margin,
                    std::string(scan.theorem_applies ? "theorem" : "informational")});
        }
        for (double t : scan.skipped_levels)
            tl.add({beta, t, level_tau(t), 0.0, 0.0, 0LL, std::string(), 0.0, std::string("skipped-near-critical")});
        const std::string tag = "field3d.beta" + detail::beta_tag(beta);
        if (scan.truncated)
            b.verdict(tag + ".truncated", "levels beyond the grid were dropped", VerdictKind::informational, 0, 0, false);
        if (!scan.skipped_levels.empty())
            b.verdict(tag + ".gaps", "near-critical levels skipped", VerdictKind::informational,
                      double(scan.skipped_levels.size()), 0, true);
        if (one_center)
            b.verdict(tag + ".constancy", "F_beta constant across levels (relative spread)", VerdictKind::theorem,
                      scan.relative_spread, 0.03, scan.relative_spread <= 0.03);
        else
            b.verdict(tag + ".scan", "largest relative increase of F_beta along tau", VerdictKind::informational,
                      scan.max_increase, scan.tol, scan.nonincreasing);
    }
    b.verdict("field3d.closed_meshes", one_center ? "level meshes closed with Euler characteristic 2" : "level meshes closed",
              VerdictKind::numerical, closed ? 1.0 : 0.0, 1.0, closed);
    if (one_center || flat)
        b.verdict("field3d.coarea", "mesh and coarea estimators agree", VerdictKind::numerical, worst_coarea, 0.02,
                  worst_coarea <= 0.02);

    const auto cps = find_critical_points(F);
    auto& tc = b.table("field3d_critical", {"x", "y", "z", "u", "grad_norm", "index", "saddle"});
    for (const auto& p : cps)
        tc.add({p.x[0], p.x[1], p.x[2], p.value, p.grad_norm, (long long)p.index,
                std::string(p.saddle ? "true" : "false")});
    if (spec.centers.size() == 2) {
        const bool one_saddle = cps.size() == 1 && cps[0].saddle;
        b.verdict("field3d.saddle", "exactly one saddle between the centers", VerdictKind::numerical,
                  double(cps.size()), 1.0, one_saddle);
        if (one_saddle) {
            const double uc = cps[0].value;
            const double d = 0.02;
            const auto below = extract_level(F, uc - d), above = extract_level(F, uc + d);
            auto& rt = b.report("field3d.transition");
            rt.set("critical_value", uc);
            rt.set("components_below", (long long)below.components);
            rt.set("components_above", (long long)above.components);
            const bool ok = below.components == 2 && above.components == 1;
            b.verdict("field3d.transition", "level components go from 2 to 1 across the saddle value",
                      VerdictKind::numerical, double(below.components - above.components), 1.0, ok);
        }
    } else {
        b.verdict("field3d.no_critical_points", "no interior critical points", VerdictKind::numerical,
                  double(cps.size()), 0.0, cps.empty());
    }
    if (spec.excisions.size() == 1) {
        const auto p = penrose_check(F);
        detail::penrose_into(b, p, one_center, one_center);
    }
    if (c.snapshot) {
        std::filesystem::create_directories(c.out_dir);
        write_snapshot(F, (std::filesystem::path(c.out_dir) / "field3d.grid").string());
    }
}

inline void run_adm(const ExperimentConfig& c, ResultBundle& b)
{
    using namespace field3d;
    const auto spec = detail::make_spec(c);
    const auto rep = adm_mass(spec, c.radii);
    auto& t = b.table("adm", {"r", "m_flux", "m_ricci", "flux_error", "ricci_error"});
    for (const auto& e : rep.estimates)
        t.add({e.r, e.m_flux, e.m_ricci, e.flux_error, e.ricci_error});
    auto& r = b.report("adm");
    r.set("flux_limit", rep.flux_limit);
    r.set("ricci_limit", rep.ricci_limit);
    r.set("agree", std::string(rep.agree ? "true" : "false"));
    const double M = spec.total_mass();
    const auto& far = rep.estimates.back();
    const double tol = spec.centers.size() > 1 ? 0.03 : 0.02;
    const double dev = M > 0 ? std::abs(far.m_flux - M) / M : std::abs(far.m_flux);
    b.verdict("adm.flux_mass", "m(r) at the largest radius against the total mass", VerdictKind::numerical, dev, tol,
              dev <= tol);
    const double ldev = M > 0 ? std::abs(rep.flux_limit - M) / M : std::abs(rep.flux_limit);
    b.verdict("adm.flux_limit", "extrapolated m(r) against the total mass", VerdictKind::numerical, ldev, 1e-3,
              ldev <= 1e-3);
    b.verdict("adm.agreement", "m and m_I agree within error bars at the two largest radii", VerdictKind::numerical,
              rep.agree ? 1.0 : 0.0, 1.0, rep.agree);
}

inline void run_selftest(const ExperimentConfig& c, ResultBundle& b);

inline ResultBundle run(const ExperimentConfig& c)
{
    c.validate();
    ResultBundle b;
    stamp_provenance(b, c);
    static const std::map<std::string, std::function<void(const ExperimentConfig&, ResultBundle&)>> table{
        {"schwarzschild", run_schwarzschild},
        {"radial", run_radial},
        {"monotone", run_monotone},
        {"penrose", run_penrose},
        {"conformal-check", run_conformal_check},
        {"identity", run_identity},
        {"field3d", run_field3d},
        {"adm", run_adm},
        {"selftest", run_selftest}};
    table.at(c.command)(c, b);
    return b;
}

} // namespace substatic::cli

#include "substatic/cli/selftest.hpp"
