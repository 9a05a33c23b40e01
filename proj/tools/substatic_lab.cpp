// Command-line runner: substatic_lab <command> [--config PATH] [overrides]

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "substatic/cli/run.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::vector<double> beta;
    std::optional<int> n;
    std::optional<double> m;
    std::optional<double> q;
    std::optional<double> tol;
    std::optional<int> grid;
    std::optional<std::uint64_t> seed;
};

void add_options(CLI::App* app, Overrides& o)
{
    app->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    app->add_option("--out", o.out, "output directory");
    app->add_option("--beta", o.beta, "beta values (replace every beta list)")->delimiter(',');
    app->add_option("--n", o.n, "dimension");
    app->add_option("--m", o.m, "mass parameter");
    app->add_option("--q", o.q, "charge parameter");
    app->add_option("--tol", o.tol, "radial quadrature tolerance");
    app->add_option("--grid", o.grid, "grid nodes per axis (field3d)");
    app->add_option("--seed", o.seed, "seed for sampled points");
}

substatic::cli::ExperimentConfig resolve(const std::string& command, const Overrides& o)
{
    auto c = o.config.empty() ? substatic::cli::ExperimentConfig{} : substatic::cli::load_config(o.config);
    c.command = command;
    if (o.out) c.out_dir = *o.out;
    if (!o.beta.empty()) {
        c.monotone_betas = o.beta;
        c.identity_betas = o.beta;
        c.conformal_betas = o.beta;
        c.field_betas = o.beta;
    }
    if (o.n) c.n = *o.n;
    if (o.m) {
        c.m = *o.m;
        c.field_m = *o.m;
    }
    if (o.q) {
        c.q = *o.q;
        if (*o.q != 0 && o.config.empty())
            c.profile = "reissner-nordstrom";
    }
    if (o.tol) c.tol = *o.tol;
    if (o.grid) c.nodes = *o.grid;
    if (o.seed) c.seed = *o.seed;
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Harmonic potentials, monotone quantities and capacity inequalities"};
    app.require_subcommand(1);
    Overrides o;
    for (const auto& name : substatic::cli::known_commands())
        add_options(app.add_subcommand(name, "run the " + name + " experiment"), o);
    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto config = resolve(command, o);
        const auto bundle = substatic::cli::run(config);
        substatic::cli::emit(bundle, config.out_dir);
        for (const auto& v : bundle.verdicts)
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " [" << substatic::cli::to_string(v.kind)
                      << "] value=" << substatic::cli::format_cell(v.value)
                      << " tol=" << substatic::cli::format_cell(v.tol) << '\n';
        std::cout << "wrote " << config.out_dir << "/summary.txt\n";
        return bundle.exit_code();
    } catch (const substatic::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
