#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "substatic/cli/run.hpp"

using namespace substatic;
using namespace substatic::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const Verdict* find(const ResultBundle& b, const std::string& name)
{
    for (const auto& v : b.verdicts)
        if (v.name == name)
            return &v;
    return nullptr;
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("substatic_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int lab(const std::string& args)
{
    const int rc = std::system((std::string(SUBSTATIC_LAB) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Config, DefaultsAndOverrides)
{
    const auto c = parse_config("# comment\n[experiment]\ncommand = penrose\n[triple]\nprofile = flat-exterior\n"
                                "; also a comment\nn = 4\n[adm]\nradii = 10, 20\n");
    EXPECT_EQ(c.command, "penrose");
    EXPECT_EQ(c.profile, "flat-exterior");
    EXPECT_EQ(c.n, 4);
    EXPECT_EQ(c.radii, (std::vector<double>{10, 20}));
    EXPECT_EQ(c.seed, ExperimentConfig{}.seed);
}

TEST(Config, UnknownKeyNamesTheLine)
{
    try {
        parse_config("[triple]\nn = 3\nmass = 2\n", "x.ini");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
        EXPECT_NE(std::string(e.what()).find("x.ini:3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos);
    }
}

TEST(Config, UnknownSectionNamesTheLine)
{
    try {
        parse_config("\n[physics]\nx = 1\n", "y.ini");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("y.ini:2"), std::string::npos) << e.what();
    }
}

TEST(Config, InvalidValuesRejected)
{
    EXPECT_THROW(parse_config("[triple]\nn = 2\n"), Error);
    EXPECT_THROW(parse_config("[triple]\nm = abc\n"), Error);
    EXPECT_THROW(parse_config("[experiment]\ncommand = nope\n"), Error);
    EXPECT_THROW(parse_config("[field3d]\nconfiguration = three-center\n"), Error);
    EXPECT_THROW(load_config("/nonexistent/path.ini"), Error);
}

TEST(Config, CanonicalHashIsStable)
{
    const auto a = parse_config("[triple]\nm = 1.0\n");
    const auto b = parse_config("# same thing\n[triple]\nm = 1\n");
    EXPECT_EQ(sha256_hex(a.canonical()), sha256_hex(b.canonical()));
    EXPECT_NE(sha256_hex(a.canonical()), sha256_hex(parse_config("[triple]\nm = 2\n").canonical()));
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Bundle, CsvAndSummary)
{
    ResultBundle b;
    auto& t = b.table("demo", {"a", "b", "c"});
    t.add({1.5, 2LL, std::string("x")});
    EXPECT_THROW(t.add({1.0}), Error);
    EXPECT_EQ(csv_text(t), "a,b,c\n1.5,2,x\n");
    b.verdict("check", "something holds", VerdictKind::informational, 1, 0, false);
    EXPECT_EQ(b.exit_code(), 0);
    b.verdict("check2", "something else", VerdictKind::numerical, 1, 0, false);
    EXPECT_EQ(b.exit_code(), 2);
    const auto s = summary_text(b);
    EXPECT_NE(s.find("check2 = FAIL ; kind=numerical"), std::string::npos);
}

TEST(Run, SchwarzschildIsGreen)
{
    ExperimentConfig c;
    c.command = "schwarzschild";
    const auto b = run(c);
    EXPECT_EQ(b.exit_code(), 0);
    ASSERT_NE(find(b, "schwarzschild.oracle"), nullptr);
    EXPECT_LT(find(b, "schwarzschild.oracle")->value, 1e-8);
    EXPECT_EQ(b.provenance.size(), 5u);
}

TEST(Run, PenroseFlatMargin)
{
    ExperimentConfig c;
    c.command = "penrose";
    c.profile = "flat-exterior";
    const auto b = run(c);
    for (const auto& r : b.reports)
        if (r.name == "penrose")
            for (const auto& [k, v] : r.fields)
                if (k == "margin")
                    EXPECT_NEAR(std::get<double>(v), 0.5, 1e-6);
}

TEST(Run, MonotoneTableShape)
{
    ExperimentConfig c;
    c.command = "monotone";
    c.monotone_betas = {1.0};
    c.tau_count = 20;
    const auto b = run(c);
    ASSERT_FALSE(b.tables.empty());
    const auto& t = b.tables.front();
    EXPECT_EQ(t.name, "monotone");
    EXPECT_EQ(t.columns, (std::vector<std::string>{"beta", "tau", "t", "F", "dF_analytic", "dF_fd", "flags"}));
    EXPECT_EQ(t.rows.size(), 21u);
    EXPECT_EQ(b.exit_code(), 0);
}

TEST(Run, ReissnerNordstromFailuresAreInformational)
{
    ExperimentConfig c;
    c.command = "monotone";
    c.profile = "reissner-nordstrom";
    c.q = 0.3;
    c.tau_count = 40;
    const auto b = run(c);
    const auto* v = find(b, "monotone.beta1.nonincreasing");
    ASSERT_NE(v, nullptr);
    EXPECT_FALSE(v->pass);
    EXPECT_EQ(v->kind, VerdictKind::informational);
    EXPECT_EQ(b.exit_code(), 0);
}

TEST(Run, SameConfigSameOutput)
{
    ExperimentConfig c;
    c.command = "conformal-check";
    c.conformal_samples = 500;
    const auto a = run(c), b = run(c);
    EXPECT_EQ(csv_text(a.tables.front()), csv_text(b.tables.front()));
    c.seed += 1;
    EXPECT_NE(csv_text(run(c).tables.front()), csv_text(a.tables.front()));
}

TEST(Emit, WritesFiles)
{
    ExperimentConfig c;
    c.command = "radial";
    const auto dir = scratch("emit");
    const auto written = emit(run(c), dir);
    EXPECT_TRUE(fs::exists(dir / "radial.csv"));
    const auto summary = slurp(dir / "summary.txt");
    EXPECT_NE(summary.find("config_sha256 = "), std::string::npos);
    EXPECT_NE(summary.find("exit_code = 0"), std::string::npos);
    EXPECT_EQ(written.back(), dir / "summary.txt");
}

TEST(Binary, ExitCodes)
{
    const auto dir = scratch("bin");
    EXPECT_EQ(lab("penrose --out " + (dir / "ok").string()), 0);
    EXPECT_EQ(lab("penrose --q 0.3 --out " + (dir / "rn").string()), 0);
    std::ofstream(dir / "bad.ini") << "[triple]\nwat = 1\n";
    EXPECT_EQ(lab("radial --config " + (dir / "bad.ini").string() + " --out " + (dir / "bad").string()), 3);
    EXPECT_EQ(lab("radial --n 2 --out " + (dir / "n2").string()), 3);
    EXPECT_TRUE(fs::exists(dir / "ok" / "summary.txt"));
}
