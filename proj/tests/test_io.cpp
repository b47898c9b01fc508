#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "llob/io.hpp"
#include "llob/model.hpp"
#include "llob/scenarios.hpp"

using namespace llob;
using namespace llob::io;

namespace {

std::filesystem::path tmp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "llob_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

double parse_back(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("format_double round-trips every value bit for bit") {
    const double values[] = {0.0,
                             1.0,
                             -1.0,
                             0.1,
                             1.0 / 3.0,
                             M_PI,
                             std::sqrt(2.0),
                             1e-300,
                             -3.5e300,
                             6.02214076e23,
                             5.64189577190702226725e-4,
                             1e17,
                             123456789.123456789};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(parse_back(s) == v);
        CHECK(s.find(',') == std::string::npos);  // locale independence
    }
    // short values stay short
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("config text: comments, whitespace, errors") {
    const std::string text =
        "# a comment\n"
        "\n"
        "model.sigma = 2.5\n"
        "  model.L=4 # trailing comment\n"
        "profile.kind = roundtrip\n";
    auto kv = parse_config_text(text);
    CHECK(kv.at("model.sigma") == "2.5");
    CHECK(kv.at("model.L") == "4");
    CHECK(kv.at("profile.kind") == "roundtrip");

    CHECK_THROWS_AS(parse_config_text("novalue\n"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("= 3\n"), ValidationError);

    // duplicate keys: the last assignment wins (file order is meaningful)
    auto dup = parse_config_text("model.L = 1\nmodel.L = 2\n");
    CHECK(dup.at("model.L") == "2");
}

TEST_CASE("serialize_config emits sorted key = value lines") {
    KeyValues kv{{"b.two", "2"}, {"a.one", "1"}};
    CHECK(serialize_config(kv) == "a.one = 1\nb.two = 2\n");
    auto back = parse_config_text(serialize_config(kv));
    CHECK(back == kv);
}

TEST_CASE("rate specs round-trip through text") {
    auto flat = parse_rate_spec("0.25");
    CHECK(flat.is_constant());
    CHECK(flat.at(3.0) == 0.25);
    CHECK(serialize_rate_spec(flat) == "0.25");

    auto pw = parse_rate_spec("0.5@0,0.05@2");
    CHECK_FALSE(pw.is_constant());
    CHECK(pw.at(1.9) == 0.5);
    CHECK(pw.at(2.0) == 0.05);
    CHECK(parse_rate_spec(serialize_rate_spec(pw)) == pw);
    // binary-exact values serialize to their short literal form
    CHECK(serialize_rate_spec(parse_rate_spec("0.5@0,0.25@2")) ==
          "0.5@0,0.25@2");

    CHECK_THROWS_AS(parse_rate_spec(""), ValidationError);
    CHECK_THROWS_AS(parse_rate_spec("0.5@1,0.1@2"), ValidationError);  // t0!=0
    CHECK_THROWS_AS(parse_rate_spec("0.5@0,0.1@0"), ValidationError);
    CHECK_THROWS_AS(parse_rate_spec("abc"), ValidationError);
}

TEST_CASE("RunConfig round-trips through its key-value form") {
    RunConfig cfg;
    cfg.sigma = 1.75;
    cfg.kappa = 0.3;
    cfg.nu = "0.5@0,0.05@2";
    cfg.L = 2.0;
    cfg.variant = "depcan";
    cfg.weighted_deposition = true;
    cfg.n_steps = 777;
    cfg.profile = "roundtrip";
    cfg.m0 = 3.25;
    cfg.t_switch = 1.5;
    cfg.T = 4.0;
    cfg.seed = 987654321012345ULL;
    cfg.out_dir = "runs/demo";
    cfg.scenario_id = "manipulation";
    cfg.scenario_overrides = {{"nu.asia", "0.05"}};

    auto kv = cfg.to_kv();
    CHECK(kv.at("solver.variant") == "depcan");
    CHECK(kv.at("scenario.set.nu.asia") == "0.05");
    auto back = RunConfig::from_kv(kv);
    CHECK(back.sigma == cfg.sigma);
    CHECK(back.nu == cfg.nu);
    CHECK(back.weighted_deposition == cfg.weighted_deposition);
    CHECK(back.n_steps == cfg.n_steps);
    CHECK(back.seed == cfg.seed);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.scenario_overrides == cfg.scenario_overrides);
    CHECK(back.to_kv() == kv);  // fixed point

    // serialized text form round-trips too
    auto parsed = parse_config_text(serialize_config(kv));
    CHECK(parsed == kv);

    CHECK_THROWS_AS(RunConfig::from_kv({{"model.bogus", "1"}}),
                    ValidationError);
    CHECK_THROWS_AS(RunConfig::from_kv({{"solver.variant", "fancy"}}),
                    ValidationError);
    CHECK_THROWS_AS(RunConfig::from_kv({{"model.sigma", "abc"}}),
                    ValidationError);
    CHECK_THROWS_AS(RunConfig::from_kv({{"run.format", "xml"}}),
                    ValidationError);
}

TEST_CASE("RunConfig builds model objects") {
    RunConfig cfg;
    cfg.sigma = 2.0;
    cfg.nu = "0.3";
    cfg.L = 4.0;
    auto p = cfg.params();
    CHECK(p.D == doctest::Approx(2.0));
    CHECK(p.J == doctest::Approx(8.0));
    CHECK(p.nu.at(0.0) == 0.3);

    cfg.variant = "meanrev";
    cfg.kappa = 0.0;
    CHECK_THROWS_AS(cfg.kernel(), ValidationError);
    cfg.kappa = 0.5;
    CHECK(cfg.kernel().kind == Kernel::mean_rev);
    cfg.variant = "llob";
    CHECK(cfg.kernel().kind == Kernel::llob);
    cfg.variant = "depcan";
    CHECK(cfg.kernel().kind == Kernel::dep_can);
}

TEST_CASE("render_csv is exact, stable text") {
    auto csv = render_csv({"t", "y"}, {{0.0, 0.5}, {1.0, 0.25}});
    CHECK(csv == "t,y\n0,1\n0.5,0.25\n");
    CHECK_THROWS_AS(render_csv({"t"}, {{0.0}, {1.0}}), ValidationError);
    CHECK_THROWS_AS(render_csv({"t", "y"}, {{0.0}, {1.0, 2.0}}),
                    ValidationError);
}

TEST_CASE("text files write and read back") {
    auto path = (tmp_dir() / "roundtrip.txt").string();
    write_text_file(path, "line one\nline two\n");
    CHECK(read_text_file(path) == "line one\nline two\n");
    CHECK_THROWS_AS(read_text_file((tmp_dir() / "missing.txt").string()),
                    ValidationError);
}

TEST_CASE("scenario reports serialize to stable JSON plus CSV tables") {
    scenarios::ScenarioReport rep;
    rep.id = "demo";
    rep.params = {{"model.L", "2"}, {"run.T", "1"}};
    rep.summary = {{"alpha", 0.5}, {"beta", -1.0}};
    rep.pass = true;
    rep.notes = {"ok: alpha in range"};
    rep.tables.push_back(
        scenarios::Table{"curve", {"t", "y"}, {{0.0, 1.0}, {2.0, 3.0}}});

    const std::string text = report_to_json(rep);
    auto j = nlohmann::json::parse(text);
    CHECK(j["id"] == "demo");
    CHECK(j["pass"] == true);
    CHECK(j["params"]["model.L"] == "2");
    CHECK(j["summary"]["alpha"] == 0.5);
    CHECK(j["checks"][0] == "ok: alpha in range");
    CHECK(j["tables"][0]["name"] == "curve");
    CHECK(j["tables"][0]["rows"] == 2);

    auto dir = tmp_dir() / "report_demo";
    std::filesystem::remove_all(dir);
    write_report(rep, dir.string());
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(read_text_file((dir / "curve.csv").string()) ==
          "t,y\n0,2\n1,3\n");
    // byte-identical on rerun
    auto first = read_text_file((dir / "report.json").string());
    write_report(rep, dir.string());
    CHECK(read_text_file((dir / "report.json").string()) == first);
}

TEST_CASE("profiles load from two-column CSVs") {
    auto path = (tmp_dir() / "profile.csv").string();
    write_text_file(path,
                    "t,m\n"
                    "0,1\n"
                    "0.5,2\n"
                    "0.75,-1\n");
    auto prof = profile_from_csv(path, 1.0, 8);
    CHECK(prof.n_steps() == 8);
    // step interpolation: value of the latest sample at or before t_k
    CHECK(prof.rate(0) == 1.0);   // t = 0
    CHECK(prof.rate(3) == 1.0);   // t = 0.375
    CHECK(prof.rate(4) == 2.0);   // t = 0.5
    CHECK(prof.rate(6) == -1.0);  // t = 0.75
    CHECK(prof.rate(8) == -1.0);

    auto bare = (tmp_dir() / "bare.csv").string();
    write_text_file(bare, "0,0.5\n1,0.5\n");
    CHECK(profile_from_csv(bare, 1.0, 4).rate(2) == 0.5);

    auto bad = (tmp_dir() / "bad.csv").string();
    write_text_file(bad, "t,m\n0.5,1\n");
    CHECK_THROWS_AS(profile_from_csv(bad, 1.0, 4), ValidationError);
    write_text_file(bad, "t,m\n0,1\n0,2\n");
    CHECK_THROWS_AS(profile_from_csv(bad, 1.0, 4), ValidationError);
    write_text_file(bad, "t,m\n0\n");
    CHECK_THROWS_AS(profile_from_csv(bad, 1.0, 4), ValidationError);
}

TEST_CASE("make_profile dispatches presets and files") {
    RunConfig cfg;
    cfg.T = 2.0;
    cfg.n_steps = 8;
    cfg.m0 = 0.75;
    cfg.t_switch = 1.0;

    cfg.profile = "zero";
    auto quiet = make_profile(cfg);
    for (double m : quiet.rates()) CHECK(m == 0.0);

    cfg.profile = "constant";
    CHECK(make_profile(cfg).rate(3) == 0.75);

    cfg.profile = "const-large";
    CHECK(make_profile(cfg).rate(0) ==
          doctest::Approx(100.0 * cfg.params().J));

    cfg.profile = "roundtrip";
    auto rt = make_profile(cfg);
    CHECK(rt.rate(0) == 0.75);
    CHECK(rt.rate(7) == -0.75);

    cfg.profile = "ramp";
    CHECK(make_profile(cfg).rate(8) == doctest::Approx(0.75));

    cfg.profile = (tmp_dir() / "nothere.csv").string();
    CHECK_THROWS_AS(make_profile(cfg), ValidationError);
}
