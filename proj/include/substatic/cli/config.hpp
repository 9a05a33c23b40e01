#pragma once

// Experiment configuration: INI text with fixed sections and keys.
//
//   [experiment]  command, seed
//   [triple]      profile (schwarzschild | reissner-nordstrom | flat-exterior), n, m, q, r0, r_max, tol
//   [monotone]    betas, tau_count, tau_min_offset, tau_max_offset
//   [identity]    betas, s_low, s_high, panels
//   [conformal]   samples, betas
//   [field3d]     configuration (single-center | two-center | flat), m, m1, m2, separation,
//                 excision_radius, nodes, extent, tol, levels, betas, snapshot
//   [adm]         radii
//   [output]      dir
//
// Lists are comma separated.  Comments start with ';' or '#'.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "substatic/error.hpp"

namespace substatic::cli {

struct ExperimentConfig {
    std::string command = "monotone";
    std::uint64_t seed = 20240601;

    std::string profile = "schwarzschild";
    int n = 3;
    double m = 1.0;
    double q = 0.0;
    double r0 = 1.0;
    double r_max = 0.0;
    double tol = 1e-12;

    std::vector<double> monotone_betas{0.5, 1.0, 2.0, 3.0};
    int tau_count = 200;
    double tau_min_offset = 1e-3;
    double tau_max_offset = 1e3;

    std::vector<double> identity_betas{1.0, 2.0};
    double s_low = 0.5;
    double s_high = 3.0;
    int panels = 128;

    int conformal_samples = 10000;
    std::vector<double> conformal_betas{0.5, 1.0, 2.0};

    std::string configuration = "single-center";
    double field_m = 1.0;
    double m1 = 0.5;
    double m2 = 0.5;
    double separation = 4.0;
    double excision_radius = 0.0;  // 0: m/2 for one center, 0.25 for two, 1 for flat
    int nodes = 64;
    double extent = 0.0;           // 0: 4 for one center or flat, 5 for two
    double field_tol = 1e-9;
    std::vector<double> levels{0.3, 0.5, 0.7};
    std::vector<double> field_betas{0.5, 1.0, 2.0};
    bool snapshot = false;

    std::vector<double> radii{50.0, 100.0, 200.0, 400.0};

    std::string out_dir = "out";

    void validate() const;
    std::string canonical() const;
};

namespace detail {

inline std::string fmt(double v)
{
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

inline std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

inline void check(bool ok, const std::string& key, const std::string& what)
{
    require(ok, ErrorKind::config, key + ": " + what);
}

} // namespace detail

inline const std::set<std::string>& known_commands()
{
    static const std::set<std::string> c{"schwarzschild", "radial",   "monotone", "penrose", "conformal-check",
                                         "identity",      "field3d", "adm",      "selftest"};
    return c;
}

inline void ExperimentConfig::validate() const
{
    using detail::check;
    check(known_commands().count(command) == 1, "experiment.command", "unknown command '" + command + "'");
    check(profile == "schwarzschild" || profile == "reissner-nordstrom" || profile == "flat-exterior",
          "triple.profile", "unknown profile '" + profile + "'");
    check(n >= 3 && n <= 12, "triple.n", "must lie in [3, 12]");
    check(m > 0, "triple.m", "must be positive");
    check(r0 > 0, "triple.r0", "must be positive");
    check(r_max >= 0, "triple.r_max", "must be nonnegative");
    check(tol > 0 && tol < 1e-3, "triple.tol", "must lie in (0, 1e-3)");
    check(!monotone_betas.empty(), "monotone.betas", "empty list");
    for (double b : monotone_betas)
        check(b >= 0, "monotone.betas", "must be nonnegative");
    check(tau_count >= 3, "monotone.tau_count", "need at least 3 points");
    check(tau_min_offset > 0 && tau_max_offset > tau_min_offset, "monotone.tau_min_offset",
          "need 0 < tau_min_offset < tau_max_offset");
    for (double b : identity_betas)
        check(b >= 0, "identity.betas", "must be nonnegative");
    check(s_low > 0 && s_high > s_low, "identity.s_low", "need 0 < s_low < s_high");
    check(panels >= 2 && panels % 2 == 0, "identity.panels", "must be even and at least 2");
    check(conformal_samples >= 1, "conformal.samples", "must be positive");
    for (double b : conformal_betas)
        check(b >= 0, "conformal.betas", "must be nonnegative");
    check(configuration == "single-center" || configuration == "two-center" || configuration == "flat",
          "field3d.configuration", "unknown configuration '" + configuration + "'");
    check(field_m > 0 && m1 > 0 && m2 > 0, "field3d.m", "masses must be positive");
    check(separation > 0, "field3d.separation", "must be positive");
    check(excision_radius >= 0, "field3d.excision_radius", "must be nonnegative");
    check(nodes >= 16 && nodes <= 400, "field3d.nodes", "must lie in [16, 400]");
    check(extent >= 0, "field3d.extent", "must be nonnegative");
    check(field_tol > 0, "field3d.tol", "must be positive");
    for (double t : levels)
        check(t > 0 && t < 1, "field3d.levels", "levels must lie in (0, 1)");
    for (double b : field_betas)
        check(b >= 0, "field3d.betas", "must be nonnegative");
    check(!radii.empty(), "adm.radii", "empty list");
    for (double r : radii)
        check(r > 0, "adm.radii", "must be positive");
    check(!out_dir.empty(), "output.dir", "empty path");
}

// Fully resolved configuration in a fixed order; hashed for provenance.
inline std::string ExperimentConfig::canonical() const
{
    using detail::fmt;
    using detail::fmt_list;
    std::ostringstream s;
    s << "[experiment]\ncommand = " << command << "\nseed = " << seed << "\n";
    s << "[triple]\nprofile = " << profile << "\nn = " << n << "\nm = " << fmt(m) << "\nq = " << fmt(q)
      << "\nr0 = " << fmt(r0) << "\nr_max = " << fmt(r_max) << "\ntol = " << fmt(tol) << "\n";
    s << "[monotone]\nbetas = " << fmt_list(monotone_betas) << "\ntau_count = " << tau_count
      << "\ntau_min_offset = " << fmt(tau_min_offset) << "\ntau_max_offset = " << fmt(tau_max_offset) << "\n";
    s << "[identity]\nbetas = " << fmt_list(identity_betas) << "\ns_low = " << fmt(s_low)
      << "\ns_high = " << fmt(s_high) << "\npanels = " << panels << "\n";
    s << "[conformal]\nsamples = " << conformal_samples << "\nbetas = " << fmt_list(conformal_betas) << "\n";
    s << "[field3d]\nconfiguration = " << configuration << "\nm = " << fmt(field_m) << "\nm1 = " << fmt(m1)
      << "\nm2 = " << fmt(m2) << "\nseparation = " << fmt(separation) << "\nexcision_radius = "
      << fmt(excision_radius) << "\nnodes = " << nodes << "\nextent = " << fmt(extent) << "\ntol = "
      << fmt(field_tol) << "\nlevels = " << fmt_list(levels) << "\nbetas = " << fmt_list(field_betas)
      << "\nsnapshot = " << (snapshot ? "true" : "false") << "\n";
    s << "[adm]\nradii = " << fmt_list(radii) << "\n";
    s << "[output]\ndir = " << out_dir << "\n";
    return s.str();
}

inline std::string sha256_hex(const std::string& text)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorKind::io,
            "sha256 failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i)
        s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return s.str();
}

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            fail(ErrorKind::config, where + ": not a number: '" + item + "'");
        }
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos])))
            ++pos;
        require(pos == item.size(), ErrorKind::config, where + ": trailing characters in '" + item + "'");
        out.push_back(v);
    }
    require(!out.empty(), ErrorKind::config, where + ": empty list");
    return out;
}

inline std::string trim(std::string s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

// Parse INI text; every key must be known.  Diagnostics carry the line.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>")
{
    // Boost's reader only knows ';' comments; rewrite '#' lines in place so
    // line numbers stay aligned.
    std::istringstream raw(text);
    std::ostringstream cleaned;
    std::map<std::string, int> line_of;
    std::string line, section;
    int lineno = 0;
    while (std::getline(raw, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (!t.empty() && t[0] == '#') {
            cleaned << ";\n";
            continue;
        }
        if (!t.empty() && t[0] == '[' && t.back() == ']') {
            section = detail::trim(t.substr(1, t.size() - 2));
            line_of.emplace("[" + section + "]", lineno);
        } else if (!t.empty() && t[0] != ';') {
            const auto eq = t.find('=');
            if (eq != std::string::npos)
                line_of.emplace(section + "." + detail::trim(t.substr(0, eq)), lineno);
        }
        cleaned << line << "\n";
    }

    boost::property_tree::ptree tree;
    try {
        std::istringstream in(cleaned.str());
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(ErrorKind::config, origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentConfig c;
    auto where = [&](const std::string& key) {
        const auto it = line_of.find(key);
        return origin + ":" + (it == line_of.end() ? std::string("?") : std::to_string(it->second)) + ": " + key;
    };
    auto num = [&](const std::string& key, const std::string& v) {
        std::size_t pos = 0;
        double x = 0;
        try {
            x = std::stod(v, &pos);
        } catch (const std::exception&) {
            fail(ErrorKind::config, where(key) + ": not a number: '" + v + "'");
        }
        require(pos == v.size(), ErrorKind::config, where(key) + ": trailing characters in '" + v + "'");
        return x;
    };
    auto integer = [&](const std::string& key, const std::string& v) {
        const double x = num(key, v);
        require(x == std::floor(x), ErrorKind::config, where(key) + ": expected an integer");
        return x;
    };
    auto boolean = [&](const std::string& key, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        fail(ErrorKind::config, where(key) + ": expected true or false");
    };

    for (const auto& [sec, body] : tree) {
        if (body.empty() && !body.data().empty())
            fail(ErrorKind::config, where("." + sec) + ": key outside any section");
        static const std::set<std::string> sections{"experiment", "triple",  "monotone", "identity",
                                                    "conformal",  "field3d", "adm",      "output"};
        require(sections.count(sec) == 1, ErrorKind::config, where("[" + sec + "]") + ": unknown section");
        for (const auto& [key, node] : body) {
            const std::string full = sec + "." + key;
            const std::string v = detail::trim(node.data());
            if (full == "experiment.command") c.command = v;
            else if (full == "experiment.seed") c.seed = std::uint64_t(integer(full, v));
            else if (full == "triple.profile") c.profile = v;
            else if (full == "triple.n") c.n = int(integer(full, v));
            else if (full == "triple.m") c.m = num(full, v);
            else if (full == "triple.q") c.q = num(full, v);
            else if (full == "triple.r0") c.r0 = num(full, v);
            else if (full == "triple.r_max") c.r_max = num(full, v);
            else if (full == "triple.tol") c.tol = num(full, v);
            else if (full == "monotone.betas") c.monotone_betas = detail::parse_list(v, where(full));
            else if (full == "monotone.tau_count") c.tau_count = int(integer(full, v));
            else if (full == "monotone.tau_min_offset") c.tau_min_offset = num(full, v);
            else if (full == "monotone.tau_max_offset") c.tau_max_offset = num(full, v);
            else if (full == "identity.betas") c.identity_betas = detail::parse_list(v, where(full));
            else if (full == "identity.s_low") c.s_low = num(full, v);
            else if (full == "identity.s_high") c.s_high = num(full, v);
            else if (full == "identity.panels") c.panels = int(integer(full, v));
            else if (full == "conformal.samples") c.conformal_samples = int(integer(full, v));
            else if (full == "conformal.betas") c.conformal_betas = detail::parse_list(v, where(full));
            else if (full == "field3d.configuration") c.configuration = v;
            else if (full == "field3d.m") c.field_m = num(full, v);
            else if (full == "field3d.m1") c.m1 = num(full, v);
            else if (full == "field3d.m2") c.m2 = num(full, v);
            else if (full == "field3d.separation") c.separation = num(full, v);
            else if (full == "field3d.excision_radius") c.excision_radius = num(full, v);
            else if (full == "field3d.nodes") c.nodes = int(integer(full, v));
            else if (full == "field3d.extent") c.extent = num(full, v);
            else if (full == "field3d.tol") c.field_tol = num(full, v);
            else if (full == "field3d.levels") c.levels = detail::parse_list(v, where(full));
            else if (full == "field3d.betas") c.field_betas = detail::parse_list(v, where(full));
            else if (full == "field3d.snapshot") c.snapshot = boolean(full, v);
            else if (full == "adm.radii") c.radii = detail::parse_list(v, where(full));
            else if (full == "output.dir") c.out_dir = v;
            else fail(ErrorKind::config, where(full) + ": unknown key");
        }
    }
    try {
        c.validate();
    } catch (const Error& e) {
        // attach the line of the offending key when it came from the file
        const std::string msg = e.what();
        const auto colon = msg.find(": ");
        const auto key_end = msg.find(": ", colon + 2);
        const std::string key = key_end == std::string::npos ? "" : msg.substr(colon + 2, key_end - colon - 2);
        if (line_of.count(key))
            fail(ErrorKind::config, where(key) + msg.substr(key_end));
        throw;
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    require(bool(in), ErrorKind::config, "cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace substatic::cli
