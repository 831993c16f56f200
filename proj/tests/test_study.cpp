#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "poem/study.hpp"

using namespace poem;
using namespace poem::study;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "poem_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << body;
    return p;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const fs::path log = temp_dir() / "cli_output.txt";
    const std::string cmd = std::string(POEM_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) *output = read_file(log);
    return WEXITSTATUS(status);
}

const std::string kTinyStudy =
    "problem = advect1d\n"
    "scheme = bw\n"
    "a = 0.5\n"
    "t_end = 2\n"
    "refinement = time-only\n"
    "ratio = 1/2\n"
    "segments = 20\n"
    "dt = 1/20\n"
    "levels = 4\n"
    "orders = 1,2\n";

}  // namespace

TEST_CASE("config parsing round trip") {
    auto p = write_config("tiny.cfg", kTinyStudy + "beta = 0.02\nmidas = on\nout_dir = somewhere\n");
    auto config = parse_config(p);
    CHECK(config.problem == schemes::ProblemKind::Advect1d);
    CHECK(config.scheme == schemes::Scheme::BeamWarming);
    CHECK(config.refinement == grid::RefinementPath::TimeOnly);
    CHECK(config.cases.size() == 1);
    CHECK(config.cases[0].ratio == Fraction(1, 2));
    CHECK(config.cases[0].segments == 20);
    CHECK(config.cases[0].dt == Fraction(1, 20));
    CHECK(config.cases[0].levels == 4);
    CHECK(config.orders.p == std::vector<double>{1.0, 2.0});
    CHECK(config.beta == 0.02);
    CHECK(config.midas);
    CHECK(config.out_dir == "somewhere");
    CHECK(config.name == "tiny");
}

TEST_CASE("config errors carry the file location and field") {
    auto bad_key = write_config("bad_key.cfg", kTinyStudy + "wibble = 3\n");
    try {
        parse_config(bad_key);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad_key.cfg:11") != std::string::npos);
        CHECK(msg.find("wibble") != std::string::npos);
    }

    auto missing = write_config("missing.cfg", "problem = advect1d\nscheme = bw\n");
    try {
        parse_config(missing);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }

    auto bad_ratio = write_config("bad_ratio.cfg", kTinyStudy + "nonsense\n");
    CHECK_THROWS_AS(parse_config(bad_ratio), ConfigError);
}

TEST_CASE("order quantum defaults to one half on constant-diffusion paths") {
    auto p = write_config("dif.cfg",
                          "problem = advdiff1d\nscheme = rk2u2\na = 0.4\nnu = 0.01\nt_end = 2.5\n"
                          "refinement = constant-diffusion\nratio = 1/2\nsegments = 100\n"
                          "dt = 1/400\nlevels = 3\norders = 2,3\n");
    CHECK(parse_config(p).orders.order_quantum == 0.5);
}

TEST_CASE("dat tables round-trip bit-exactly") {
    DataTable t;
    t.columns = {"log10_h", "a", "b"};
    t.provenance = "emitted by poem, study 'roundtrip'";
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 3; ++i)
        t.rows.push_back({uni(rng), uni(rng) * 1e-300, uni(rng) * 1e300});

    const fs::path p = temp_dir() / "roundtrip.dat";
    emit_dat(t, p);

    // Two header lines plus one line per row.
    std::ifstream in(p);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 5);

    auto back = parse_dat(p);
    CHECK(back.columns == t.columns);
    CHECK(back.provenance == t.provenance);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < t.rows[i].size(); ++j)
            CHECK(back.rows[i][j] == t.rows[i][j]);
}

TEST_CASE("work-unit model") {
    // Doubling, 3 levels, constant CFL: work = (1 + 4 + 16) * S * T.
    auto doubling = parse_config(write_config(
        "cost_a.cfg",
        "problem = advect1d\nscheme = rk2u2\na = 0.5\nt_end = 2\nrefinement = constant-cfl\n"
        "ratio = 1/2\nsegments = 144\ndt = 1/144\nlevels = 3\norders = 2,3\n"));
    auto fractional = parse_config(write_config(
        "cost_b.cfg",
        "problem = advect1d\nscheme = rk2u2\na = 0.5\nt_end = 2\nrefinement = constant-cfl\n"
        "ratio = 3/4\nsegments = 144\ndt = 1/144\nlevels = 3\norders = 2,3\n"));
    auto cmp = cost_model(doubling, fractional);
    CHECK(cmp.work_a == 21LL * 144 * 288);
    CHECK(cmp.work_b == 144LL * 288 + 192LL * 384 + 256LL * 512);
    CHECK(cmp.ratio == doctest::Approx(21.0 / (1.0 + 16.0 / 9.0 + 256.0 / 81.0)).epsilon(1e-12));
    CHECK(cmp.ratio == doctest::Approx(3.54).epsilon(0.01));
}

TEST_CASE("a small study runs end to end in memory") {
    auto config = parse_config(write_config("run_mem.cfg", kTinyStudy));
    auto result = run_study(config);
    REQUIRE(result.cases.size() == 1);
    const auto& report = result.cases[0].report;
    REQUIRE(report.windows.size() == 2);
    CHECK(report.windows[0].support_shared == 20);
    CHECK(report.windows[0].support_objective == 0);
    CHECK(!report.windows[0].eps_full.has_value());  // no analytic reference in time-only mode
    CHECK(report.order_check.verdicts.size() == 2);
    CHECK(result.total_work > 0);
    CHECK(result.iteration.trail.size() >= 1);
}

TEST_CASE("two-tier studies report shared and objective norms per tier") {
    auto config = parse_config(write_config(
        "two_tier.cfg",
        "problem = advect1d\nscheme = rk2u2\na = 0.5\nt_end = 2\nrefinement = constant-cfl\n"
        "protocol = two-tier\ntiers = 3\ncase = ratio=2/3 segments=4 dt=1/4\norders = 2,3\n"));
    auto result = run_study(config);
    REQUIRE(result.cases.size() == 1);
    const auto& report = result.cases[0].report;
    REQUIRE(report.windows.size() == 3);
    for (const auto& w : report.windows) {
        CHECK(w.support_objective == 3 * w.support_shared);  // 4-6-9 unit
        CHECK(w.term_l2_objective.size() == 2);
    }
    CHECK(report.windows[0].h == doctest::Approx(0.25));
    CHECK(report.windows[2].h == doctest::Approx(0.0625));
}

TEST_CASE("cli run produces the documented outputs deterministically") {
    const fs::path out1 = temp_dir() / "out1";
    const fs::path out2 = temp_dir() / "out2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    auto cfg = write_config("cli_run.cfg", kTinyStudy);

    std::string text;
    CHECK(run_cli("run " + cfg.string() + " --out " + out1.string(), &text) == 0);
    CHECK(run_cli("run " + cfg.string() + " --out " + out2.string()) == 0);
    for (const char* f : {"cnorm.dat", "cnorm_slope.dat", "beta.dat", "es_err.dat", "report.json",
                          "summary.txt"}) {
        CHECK(fs::exists(out1 / f));
        CHECK(read_file(out1 / f) == read_file(out2 / f));
    }
    CHECK(!fs::exists(out1 / "disc_err.dat"));  // time-only: no analytic comparison
}

TEST_CASE("cli exit codes distinguish config and numeric failures") {
    std::string text;

    auto impossible = write_config(
        "impossible.cfg",
        "problem = advect1d\nscheme = rk2u2\na = 0.5\nt_end = 2\nrefinement = constant-cfl\n"
        "ratio = 2/3\nsegments = 4\ndt = 1/4\nlevels = 4\norders = 2,3\n");
    CHECK(run_cli("run " + impossible.string(), &text) == 2);
    CHECK(text.find("level 4") != std::string::npos);

    auto unstable = write_config(
        "unstable.cfg",
        "problem = advect1d\nscheme = rk2u2\na = 0.5\nt_end = 2\nrefinement = constant-cfl\n"
        "ratio = 1/2\nsegments = 10\ndt = 1/5\nlevels = 3\norders = 2,3\n");
    CHECK(run_cli("run " + unstable.string(), &text) == 3);
    CHECK(text.find("CFL") != std::string::npos);

    auto empty = write_config("empty.cfg", "");
    CHECK(run_cli("run " + empty.string(), &text) == 2);
    CHECK(text.find("problem") != std::string::npos);

    CHECK(run_cli("run /nonexistent/path.cfg", &text) == 2);
}

TEST_CASE("cli cost compares two configurations") {
    auto a = write_config(
        "c2d_half.cfg",
        "problem = advect2d\nscheme = rk2u2\na = 0.25\na_y = 0.25\nt_end = 2\n"
        "refinement = constant-cfl\nratio = 1/2\nsegments = 243\ndt = 1/243\nlevels = 3\n"
        "orders = 2,3\n");
    auto b = write_config(
        "c2d_threequarter.cfg",
        "problem = advect2d\nscheme = rk2u2\na = 0.25\na_y = 0.25\nt_end = 2\n"
        "refinement = constant-cfl\nratio = 3/4\nsegments = 243\ndt = 1/243\nlevels = 3\n"
        "orders = 2,3\n");
    std::string text;
    CHECK(run_cli("cost " + a.string() + " " + b.string(), &text) == 0);
    CHECK(text.find("4.55") != std::string::npos);
    CHECK(text.find("work-unit ratio") != std::string::npos);

    auto ca = parse_config(a);
    auto cb = parse_config(b);
    auto cmp = cost_model(ca, cb);
    CHECK(cmp.work_b < cmp.work_a);  // fractional refinement is cheaper
    CHECK(cmp.ratio > 8.0);
    CHECK(cmp.ratio < 8.3);
}

TEST_CASE("check-orders prints the iteration trail") {
    auto cfg = write_config("trail.cfg", kTinyStudy);
    std::string text;
    CHECK(run_cli("check-orders " + cfg.string(), &text) == 0);
    CHECK(text.find("iteration 1") != std::string::npos);
    CHECK(text.find("converged") != std::string::npos);
}

TEST_CASE("bundled study configs parse") {
    const fs::path dir(POEM_CONFIG_DIR);
    int seen = 0;
    for (const char* name :
         {"bw-time.cfg", "rk2u2-time.cfg", "rk2u2-cfl.cfg", "rk2u2-diffusion.cfg",
          "advect2d-cfl.cfg", "midas-1d-consistency.cfg", "midas-2d-ratios.cfg"}) {
        const fs::path p = dir / name;
        REQUIRE(fs::exists(p));
        CHECK_NOTHROW(parse_config(p));
        ++seen;
    }
    CHECK(seen == 7);
}
