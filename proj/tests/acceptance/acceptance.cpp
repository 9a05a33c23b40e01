// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "substatic/cli/run.hpp"
#include "substatic/substatic.hpp"

using namespace substatic;
using geometry::Dimension;
using geometry::flat_exterior_profile;
using geometry::reissner_nordstrom_profile;
using geometry::schwarzschild_profile;
using radial::RadialTriple;
using radial::solve_radial_potential;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

RadialTriple schwarzschild(int n, double m) { return solve_radial_potential(schwarzschild_profile(Dimension(n), m)); }
RadialTriple rn() { return solve_radial_potential(reissner_nordstrom_profile(Dimension(3), 1.0, 0.3)); }
RadialTriple flat() { return solve_radial_potential(flat_exterior_profile(Dimension(3), 1.0)); }

bool substatic(const RadialTriple& tr)
{
    return geometry::substatic_check(tr, monotone::substatic_samples(tr)).is_substatic;
}

Outcome schwarzschild_oracle()
{
    Outcome o;
    const auto t0 = Clock::now();
    const auto tr = schwarzschild(3, 1.0);
    double worst = 0;
    for (double x : geometric_offsets(1e-10, 1e3 / tr.r0() - 1.0, 4000)) {
        const double r = tr.r0() * (1 + x);
        worst = std::max(worst, std::abs(tr.u(r) - std::sqrt(1 - 2 / r)));
    }
    const double dt = seconds_since(t0);
    o.check(worst < 1e-8, "max error " + num(worst));
    o.check(dt < 1.0, "runtime " + num(dt) + " s");
    o.note("max error " + num(worst) + ", " + num(dt) + " s");
    return o;
}

Outcome capacity_equals_mass()
{
    Outcome o;
    double worst = 0, spread = 0;
    for (int n : {3, 4, 5}) {
        const auto tr = schwarzschild(n, 1.0);
        const auto c = radial::capacity(tr);
        worst = std::max(worst, std::abs(c.agreed_value - 1.0));
        spread = std::max(spread, c.max_rel_spread);
    }
    for (const auto& tr : {rn(), flat()})
        spread = std::max(spread, radial::capacity(tr).max_rel_spread);
    o.check(worst < 1e-6, "capacity - m = " + num(worst));
    o.check(spread < 1e-4, "flux/energy/infinity spread " + num(spread));
    o.note("|C - m| " + num(worst) + ", spread " + num(spread));
    return o;
}

Outcome rigidity()
{
    Outcome o;
    const auto tr = schwarzschild(3, 1.0);
    std::vector<double> taus{1.0};
    for (double t : monotone::default_tau_grid(200))
        taus.push_back(t);
    double worst = 0;
    for (double beta : {0.5, 1.0, 2.0, 3.0}) {
        const double c = monotone::F_beta_limit_closed_form(3, beta, 1.0);
        for (double tau : taus)
            worst = std::max(worst, std::abs(monotone::F_beta(tr, beta, tau) - c) / c);
    }
    o.check(worst < 1e-6, "relative deviation " + num(worst));
    o.check(std::abs(monotone::F_beta_limit_closed_form(3, 1.0, 1.0) - 4 * pi) < 1e-12, "beta = 1 constant is 4 pi");
    o.note("max relative deviation " + num(worst));
    return o;
}

Outcome derivative_formulas()
{
    Outcome o;
    double worst1 = 0, worst2 = 0, slowest = 0;
    const auto taus = monotone::default_tau_grid(200);
    for (const auto& tr : {schwarzschild(3, 1.0), rn()}) {
        for (double beta : {0.5, 1.0, 2.0, 3.0}) {
            const auto t0 = Clock::now();
            const auto curve = monotone::monotone_curve(tr, beta, taus);
            for (const auto& s : curve.samples) {
                const double h = monotone::fd_step(s.x);
                const double fd2 = (monotone::F_beta(tr, beta, s.x + 2 * h) - monotone::F_beta(tr, beta, s.x - 2 * h)) / (4 * h);
                const double allow = std::max(1e-6, 1e-4 * std::abs(s.value)) + std::abs(fd2 - s.fd_derivative);
                worst1 = std::max(worst1, std::abs(s.analytic_derivative - s.fd_derivative) / allow);
            }
            for (double tau : {1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0}) {
                const double F = monotone::F_beta(tr, beta, tau);
                worst2 = std::max(worst2, std::abs(monotone::F_beta_second_analytic(tr, beta, tau) -
                                                   monotone::F_beta_fd_second(tr, beta, tau)) /
                                              std::max(1e-5, 1e-3 * std::abs(F)));
            }
            slowest = std::max(slowest, seconds_since(t0));
        }
    }
    o.check(worst1 <= 1.0, "F' mismatch " + num(worst1) + " tolerance units");
    o.check(worst2 <= 1.0, "F'' mismatch " + num(worst2) + " tolerance units");
    o.check(slowest < 10.0, "curve runtime " + num(slowest) + " s");
    o.note("F' " + num(worst1) + ", F'' " + num(worst2) + " of tolerance, slowest curve " + num(slowest) + " s");
    return o;
}

Outcome monotonicity()
{
    Outcome o;
    const auto taus = monotone::default_tau_grid(200);
    int fixtures = 0;
    double max_fd = -1e300, min_second = 1e300;
    for (const auto& tr : {schwarzschild(3, 1.0), schwarzschild(3, 0.5), schwarzschild(3, 3.0), rn(), flat()}) {
        if (!substatic(tr))
            continue;
        ++fixtures;
        for (double beta : {0.5, 1.0, 2.0}) {
            const auto c = monotone::monotone_curve(tr, beta, taus);
            max_fd = std::max(max_fd, c.max_fd_derivative);
            min_second = std::min(min_second, c.min_second_difference);
        }
    }
    o.check(fixtures > 0, "no sub-static fixture");
    o.check(max_fd <= 1e-6, "fd derivative " + num(max_fd));
    o.check(min_second >= -1e-6, "second difference " + num(min_second));
    o.note(std::to_string(fixtures) + " sub-static fixtures, max F' " + num(max_fd) + ", min second difference " +
           num(min_second));
    return o;
}

Outcome penrose()
{
    Outcome o;
    double worst_ss = 1e300, schw = 0;
    for (const auto& tr : {schwarzschild(3, 1.0), schwarzschild(4, 1.0), schwarzschild(5, 0.5)}) {
        const auto p = monotone::penrose_check(tr);
        worst_ss = std::min(worst_ss, p.margin);
        schw = std::max(schw, std::abs(p.margin));
    }
    const double fm = monotone::penrose_check(flat()).margin;
    o.check(worst_ss >= -1e-8, "sub-static margin " + num(worst_ss));
    o.check(schw <= 1e-8, "Schwarzschild |margin| " + num(schw));
    o.check(std::abs(fm - 0.5) <= 1e-6, "flat margin " + num(fm));
    o.note("Schwarzschild |margin| " + num(schw) + ", flat margin " + num(fm));
    return o;
}

Outcome conformal_identities()
{
    Outcome o;
    double star = 0, grad = 0, hess = 0, kato = 1e300;
    int fixture = 0;
    for (const auto& tr : {schwarzschild(3, 1.0), rn()}) {
        std::mt19937_64 rng(20240601 + fixture);
        std::uniform_real_distribution<double> lx(std::log(1e-4), std::log(tr.r_max() / tr.r0() - 1.0));
        for (int i = 0; i < 10000; ++i) {
            const double r = tr.r0() * (1 + std::exp(lx(rng)));
            const auto st = conformal::conformal_state(tr, r);
            const double a = st.one_minus_u * (2 - st.one_minus_u);
            const double G = tr.grad_norm(r);
            const double rhs = 4 * G * G / std::pow(a, 4);
            star = std::max(star, std::abs(st.grad_phi_norm * st.grad_phi_norm - rhs) / rhs);
            kato = std::min(kato, conformal::kato_check(st));
            if (fixture == 0) {
                grad = std::max(grad, std::abs(st.grad_phi_norm - 0.5));
                hess = std::max(hess, std::abs(st.hess_phi_norm2));
            }
        }
        ++fixture;
    }
    o.check(star <= 1e-10, "star identity " + num(star));
    o.check(grad <= 1e-8, "|grad phi| - 0.5 = " + num(grad));
    o.check(hess < 1e-9, "hess phi norm " + num(hess));
    o.check(kato >= -1e-10, "Kato margin " + num(kato));
    o.note("star " + num(star) + ", grad " + num(grad) + ", hess " + num(hess) + ", Kato min " + num(kato));
    return o;
}

Outcome integral_identity()
{
    Outcome o;
    double worst = 0, slowest = 0;
    bool halves = true;
    for (const auto& tr : {schwarzschild(3, 1.0), rn(), flat()}) {
        for (double beta : {1.0, 2.0}) {
            for (auto [lo, hi] : {std::pair{0.5, 3.0}, {1.0, 2.0}}) {
                const auto t0 = Clock::now();
                const double floor = 1e-12 * 1e8 * conformal::boundary_scale(tr, beta, lo);
                for (int which = 0; which < 2; ++which) {
                    auto f = [&](int p) {
                        return which == 0 ? conformal::integral_identity_residual(tr, beta, lo, hi, p)
                                          : conformal::quotient_identity_residual(tr, beta, lo, hi, p);
                    };
                    const auto a = f(conformal::default_panels), b = f(2 * conformal::default_panels);
                    worst = std::max(worst, a.relative_residual);
                    halves = halves && (a.residual <= floor || b.residual <= 0.5 * a.residual);
                }
                slowest = std::max(slowest, seconds_since(t0));
            }
        }
    }
    o.check(worst < 1e-5, "relative residual " + num(worst));
    o.check(halves, "residual did not halve under refinement");
    o.check(slowest < 5.0, "runtime " + num(slowest) + " s");
    o.note("max relative residual " + num(worst) + ", slowest window " + num(slowest) + " s");
    return o;
}

Outcome phi_representation()
{
    Outcome o;
    double worst = 0, drop = 0;
    for (const auto& tr : {schwarzschild(3, 1.0), rn(), flat()}) {
        const bool ss = substatic(tr);
        for (double beta : {0.5, 1.0, 2.0}) {
            double prev = -1e300;
            for (double s : linspace(0.5, 3.0, 26)) {
                const double P = conformal::Phi_beta(tr, beta, s);
                const double dP = conformal::Phi_beta_prime(tr, beta, s);
                worst = std::max(worst, std::abs(dP - conformal::Phi_beta_fd(tr, beta, s)) / std::max(1e-6, 1e-3 * std::abs(P)));
                const double q = dP / std::sinh(s);
                if (ss)
                    drop = std::max(drop, prev - q);
                prev = q;
            }
        }
    }
    o.check(worst <= 1.0, "Phi' mismatch " + num(worst) + " tolerance units");
    o.check(drop <= 1e-8, "quotient drop " + num(drop));
    o.note("Phi' " + num(worst) + " of tolerance, largest quotient drop " + num(drop));
    return o;
}

Outcome field_single_center()
{
    using namespace field3d;
    Outcome o;
    const auto spec = single_center(1.0);
    const auto t0 = Clock::now();
    const auto F = solve_field(spec, {96, 4.0}, {});
    const double dt = seconds_since(t0);
    const double cap = F.capacity();
    o.check(std::abs(cap - 1.0) <= 0.02, "capacity " + num(cap));
    o.check(dt < 300.0, "solve runtime " + num(dt) + " s");
    const std::vector<double> levels{0.3, 0.5, 0.7};
    double spread = 0;
    for (double beta : {0.5, 1.0, 2.0})
        spread = std::max(spread, monotonicity_scan(F, beta, levels).relative_spread);
    o.check(spread <= 0.03, "F spread " + num(spread));
    const std::vector<double> radii{50, 100, 200, 400};
    const auto adm = adm_mass(spec, radii);
    const double mf = adm.estimates.back().m_flux;
    o.check(std::abs(mf - 1.0) <= 0.02, "m_flux " + num(mf));
    o.check(adm.agree, "flux and Ricci masses disagree");
    o.note("capacity " + num(cap) + " in " + num(dt) + " s, F spread " + num(spread) + ", m_flux(400) " + num(mf) +
           ", m_ricci " + num(adm.estimates.back().m_ricci));
    return o;
}

Outcome field_two_center()
{
    using namespace field3d;
    Outcome o;
    ScalarField3D F = [] {
        try {
            return solve_field(two_center(0.5, 0.5, 4.0, 0.25), {81, 5.0}, {});
        } catch (const Error&) {
            return ScalarField3D{};
        }
    }();
    o.check(F.iterations() > 0, "solver did not converge");
    if (!o.pass)
        return o;
    const auto cps = find_critical_points(F);
    int saddles = 0;
    double uc = 0;
    for (const auto& cp : cps)
        if (cp.saddle && std::abs(cp.x[0]) < 1.0) {
            ++saddles;
            uc = cp.value;
        }
    o.check(saddles == 1, std::to_string(saddles) + " saddles between the centers");
    if (saddles == 1) {
        const int below = extract_level(F, uc - 0.02).components, above = extract_level(F, uc + 0.02).components;
        o.check(below == 2 && above == 1, "components " + std::to_string(below) + " -> " + std::to_string(above));
        // Regression values at this resolution.
        o.check(std::abs(uc - 0.622298) < 1e-4, "u_c moved to " + num(uc));
        o.check(std::abs(F.capacity() - 0.9449) < 2e-3, "capacity moved to " + num(F.capacity()));
        o.note("u_c " + num(uc) + ", components " + std::to_string(below) + " -> " + std::to_string(above) +
               ", capacity " + num(F.capacity()));
    }
    return o;
}

Outcome selftest()
{
    Outcome o;
    cli::ExperimentConfig c;
    c.command = "selftest";
    const auto t0 = Clock::now();
    const auto b = cli::run(c);
    const double dt = seconds_since(t0);
    int failed = 0;
    for (const auto& v : b.verdicts)
        if (v.kind != cli::VerdictKind::informational && !v.pass)
            ++failed;
    o.check(failed == 0 && b.exit_code() == 0, std::to_string(failed) + " failing verdicts");
    o.check(dt < 600.0, "runtime " + num(dt) + " s");
    o.note(std::to_string(b.verdicts.size()) + " verdicts in " + num(dt) + " s");
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Schwarzschild potential oracle", schwarzschild_oracle},
        {"capacity equals mass", capacity_equals_mass},
        {"F_beta constancy on Schwarzschild", rigidity},
        {"analytic F' and F'' against finite differences", derivative_formulas},
        {"monotonicity and convexity on sub-static fixtures", monotonicity},
        {"Penrose margins", penrose},
        {"conformal pointwise identities", conformal_identities},
        {"integral identities and refinement", integral_identity},
        {"Phi_beta derivative and quotient", phi_representation},
        {"field3d single center", field_single_center},
        {"field3d two centers", field_two_center},
        {"selftest", selftest},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
