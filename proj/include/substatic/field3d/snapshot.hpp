#pragma once

// Grid snapshot: a short text header terminated by "end_header\n", then
// n^3 little-endian float64 values, x fastest.
//
//   substatic-grid 1
//   dims = 64 64 64
//   spacing = 0.126...
//   extent = 4
//   byte_order = little
//   scalar = float64
//   center = x y z mass        (one line per center)
//   excision = x y z radius    (one line per excision)
//   end_header

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "substatic/error.hpp"
#include "substatic/field3d/solver.hpp"

namespace substatic::field3d {

namespace detail {

inline std::uint64_t to_little(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i)
            r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

} // namespace detail

inline void write_snapshot(const ScalarField3D& field, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    require(bool(out), ErrorKind::io, "cannot open " + path + " for writing");
    const Grid& G = field.grid();
    out << std::setprecision(17);
    out << "substatic-grid 1\n";
    out << "dims = " << G.n << ' ' << G.n << ' ' << G.n << '\n';
    out << "spacing = " << G.h << '\n';
    out << "extent = " << G.L << '\n';
    out << "byte_order = little\nscalar = float64\n";
    const auto& s = field.spec();
    for (std::size_t i = 0; i < s.centers.size(); ++i)
        out << "center = " << s.centers[i][0] << ' ' << s.centers[i][1] << ' ' << s.centers[i][2] << ' '
            << s.masses[i] << '\n';
    for (const auto& e : s.excisions)
        out << "excision = " << e.center[0] << ' ' << e.center[1] << ' ' << e.center[2] << ' ' << e.radius << '\n';
    out << "end_header\n";
    for (double v : field.values()) {
        const std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), 8);
    }
    require(bool(out), ErrorKind::io, "write failed for " + path);
}

inline ScalarField3D read_snapshot(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(bool(in), ErrorKind::io, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    require(line == "substatic-grid 1", ErrorKind::io, "not a grid snapshot: " + path);
    int n = 0;
    double L = 0;
    ConformalFactorSpec spec;
    while (std::getline(in, line) && line != "end_header") {
        std::istringstream ls(line);
        std::string key, eq;
        ls >> key >> eq;
        if (key == "dims") {
            int a, b, c;
            ls >> a >> b >> c;
            require(a == b && b == c, ErrorKind::io, "only cubic grids are supported");
            n = a;
        } else if (key == "extent") {
            ls >> L;
        } else if (key == "byte_order") {
            std::string v;
            ls >> v;
            require(v == "little", ErrorKind::io, "unsupported byte order " + v);
        } else if (key == "scalar") {
            std::string v;
            ls >> v;
            require(v == "float64", ErrorKind::io, "unsupported scalar type " + v);
        } else if (key == "center") {
            Point3 c;
            double m;
            ls >> c[0] >> c[1] >> c[2] >> m;
            spec.centers.push_back(c);
            spec.masses.push_back(m);
        } else if (key == "excision") {
            Excision e;
            ls >> e.center[0] >> e.center[1] >> e.center[2] >> e.radius;
            spec.excisions.push_back(e);
        }
        require(!ls.fail(), ErrorKind::io, "malformed header line: " + line);
    }
    require(line == "end_header" && n > 0 && L > 0, ErrorKind::io, "incomplete snapshot header");
    std::vector<double> values(std::size_t(n) * n * n);
    for (auto& v : values) {
        std::uint64_t bits;
        in.read(reinterpret_cast<char*>(&bits), 8);
        v = std::bit_cast<double>(detail::to_little(bits));
    }
    require(bool(in), ErrorKind::io, "snapshot data truncated");
    return make_field(Grid(n, L), std::move(spec), std::move(values));
}

} // namespace substatic::field3d
