#pragma once

// The invariant suite: every subcommand on the shipped fixtures, verdicts
// merged under "<fixture>/<verdict>".

#include <chrono>
#include <string>
#include <vector>

#include "substatic/cli/run.hpp"

namespace substatic::cli {

struct Fixture {
    std::string name;
    ExperimentConfig config;
};

inline std::vector<Fixture> selftest_fixtures(const ExperimentConfig& base)
{
    std::vector<Fixture> out;
    auto add = [&](std::string name, std::string command, auto&& tweak) {
        ExperimentConfig c = base;
        c.command = std::move(command);
        c.profile = "schwarzschild";
        c.n = 3;
        c.m = 1.0;
        c.q = 0.0;
        c.r0 = 1.0;
        tweak(c);
        out.push_back({std::move(name), c});
    };
    auto none = [](ExperimentConfig&) {};
    for (int n : {3, 4, 5})
        add("schwarzschild-n" + std::to_string(n), "schwarzschild", [n](ExperimentConfig& c) {
            c.n = n;
            c.m = n == 3 ? 1.0 : 0.5;
        });
    add("radial-rn", "radial", [](ExperimentConfig& c) {
        c.profile = "reissner-nordstrom";
        c.q = 0.3;
    });
    add("radial-flat", "radial", [](ExperimentConfig& c) { c.profile = "flat-exterior"; });
    add("monotone-schwarzschild", "monotone", none);
    add("monotone-rn", "monotone", [](ExperimentConfig& c) {
        c.profile = "reissner-nordstrom";
        c.q = 0.3;
    });
    add("monotone-flat", "monotone", [](ExperimentConfig& c) { c.profile = "flat-exterior"; });
    add("penrose-schwarzschild", "penrose", none);
    add("penrose-schwarzschild-n5", "penrose", [](ExperimentConfig& c) {
        c.n = 5;
        c.m = 0.5;
    });
    add("penrose-flat", "penrose", [](ExperimentConfig& c) { c.profile = "flat-exterior"; });
    add("conformal-schwarzschild", "conformal-check", none);
    add("conformal-rn", "conformal-check", [](ExperimentConfig& c) {
        c.profile = "reissner-nordstrom";
        c.q = 0.3;
    });
    add("identity-schwarzschild", "identity", none);
    add("identity-rn", "identity", [](ExperimentConfig& c) {
        c.profile = "reissner-nordstrom";
        c.q = 0.3;
    });
    add("identity-flat", "identity", [](ExperimentConfig& c) { c.profile = "flat-exterior"; });
    add("field3d-single", "field3d", [](ExperimentConfig& c) { c.configuration = "single-center"; });
    add("field3d-flat", "field3d", [](ExperimentConfig& c) { c.configuration = "flat"; });
    add("field3d-two-center", "field3d", [](ExperimentConfig& c) {
        c.configuration = "two-center";
        c.nodes = 81;
    });
    add("adm-single", "adm", [](ExperimentConfig& c) { c.configuration = "single-center"; });
    add("adm-flat", "adm", [](ExperimentConfig& c) { c.configuration = "flat"; });
    return out;
}

inline void run_selftest(const ExperimentConfig& c, ResultBundle& b)
{
    auto& t = b.table("selftest", {"fixture", "verdict", "kind", "value", "tol", "pass"});
    auto& r = b.report("selftest");
    for (const auto& fx : selftest_fixtures(c)) {
        const auto start = std::chrono::steady_clock::now();
        ResultBundle sub;
        try {
            sub = run(fx.config);
        } catch (const Error& e) {
            b.verdict(fx.name + "/error", e.what(), VerdictKind::numerical, 1.0, 0.0, false);
            continue;
        }
        for (const auto& v : sub.verdicts) {
            t.add({fx.name, v.name, std::string(to_string(v.kind)), v.value, v.tol,
                   std::string(v.pass ? "true" : "false")});
            b.verdicts.push_back(v);
            b.verdicts.back().name = fx.name + "/" + v.name;
        }
        r.set(fx.name + ".seconds",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
}

} // namespace substatic::cli
