#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "cradon/experiment.hpp"
#include "cradon/io.hpp"

using namespace cradon;
using Catch::Matchers::ContainsSubstring;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "cradon_io_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

struct CliResult {
    int code = -1;
    std::string out, err;
};

// run the installed binary; `env` is an optional VAR=value prefix
CliResult cli(const std::string& args, const std::string& env = "") {
    static int seq = 0;
    fs::path so = work_dir() / ("cli_out_" + std::to_string(seq));
    fs::path se = work_dir() / ("cli_err_" + std::to_string(seq));
    ++seq;
    std::string cmd = (env.empty() ? "" : env + " ") + std::string(CRADON_CLI_PATH) + " " +
                      args + " >" + so.string() + " 2>" + se.string();
    int rc = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

fs::path write_config(const std::string& name, const json& cfg) {
    fs::path p = work_dir() / name;
    spit(p, cfg.dump());
    return p;
}

json disk_geometry_config() {
    return json{{"experiment", "geometry"},
                {"set", {{"kind", "ball"}, {"center", {0.0, 0.0, 0.0, 0.0}}, {"radius", 1.0}}},
                {"expect", {{"complement_connected", true}, {"components", 1}}}};
}

}  // namespace

TEST_CASE("sinogram container roundtrips exactly") {
    numerics::SphereGrid sp = numerics::sphere_grid(4, 4);
    numerics::SGrid grid(cplx(0.3, -0.1), 1.5, 9);
    numerics::Sinogram S(sp, grid);
    for (std::size_t i = 0; i < S.values.size(); ++i)
        S.values[i] = cplx(std::sin(double(i)) * 1e3, std::cos(double(i)) / 3.0);
    S.valid_margin = 2;
    S.provenance = "roundtrip check";

    fs::path p = work_dir() / "round.crdn";
    io::write_sinogram(p.string(), S);
    numerics::Sinogram R = io::read_sinogram(p.string());

    REQUIRE(R.sphere.n_eta == 4);
    REQUIRE(R.sphere.n_theta == 4);
    REQUIRE(R.sphere.size() == sp.size());
    REQUIRE(R.grid.center == grid.center);
    REQUIRE(R.grid.extent == grid.extent);
    REQUIRE(R.grid.count == grid.count);
    REQUIRE(R.valid_margin == 2);
    REQUIRE(R.provenance == "roundtrip check");
    REQUIRE(R.values.size() == S.values.size());
    for (std::size_t i = 0; i < S.values.size(); ++i) REQUIRE(R.values[i] == S.values[i]);

    // the sphere nodes come back through the same constructor
    for (std::size_t i = 0; i < sp.size(); ++i) REQUIRE(R.sphere.nodes[i] == sp.nodes[i]);
}

TEST_CASE("volume container roundtrips exactly") {
    transform::VolumeGrid V;
    V.extent = 1.25;
    V.count = 5;
    V.values.resize(625);
    for (std::size_t i = 0; i < V.values.size(); ++i)
        V.values[i] = cplx(double(i) * 0.125, -double(i % 17));

    fs::path p = work_dir() / "round.crvl";
    io::write_volume(p.string(), V);
    transform::VolumeGrid R = io::read_volume(p.string());

    REQUIRE(R.extent == 1.25);
    REQUIRE(R.count == 5);
    REQUIRE(R.values.size() == V.values.size());
    for (std::size_t i = 0; i < V.values.size(); ++i) REQUIRE(R.values[i] == V.values[i]);
}

TEST_CASE("containers reject foreign or damaged bytes") {
    fs::path garbage = work_dir() / "garbage.bin";
    spit(garbage, "certainly not a container");
    REQUIRE_THROWS_AS(io::read_sinogram(garbage.string()), std::runtime_error);
    REQUIRE_THROWS_AS(io::read_volume(garbage.string()), std::runtime_error);
    REQUIRE_THROWS_AS(io::read_sinogram((work_dir() / "missing.crdn").string()),
                      std::runtime_error);

    // a valid volume is not a sinogram
    transform::VolumeGrid V;
    V.extent = 1.0;
    V.count = 3;
    V.values.assign(81, cplx(0, 0));
    fs::path vp = work_dir() / "shape.crvl";
    io::write_volume(vp.string(), V);
    REQUIRE_THROWS_WITH(io::read_sinogram(vp.string()), ContainsSubstring("not a sinogram"));

    std::string bytes = slurp(vp.string());
    spit(work_dir() / "ragged.crvl", bytes + "extra");
    REQUIRE_THROWS_WITH(io::read_volume((work_dir() / "ragged.crvl").string()),
                        ContainsSubstring("ragged"));
    spit(work_dir() / "short.crvl", bytes.substr(0, bytes.size() - 16));
    REQUIRE_THROWS_WITH(io::read_volume((work_dir() / "short.crvl").string()),
                        ContainsSubstring("does not match its header"));
    spit(work_dir() / "furl.crvl", bytes.substr(0, 7));
    REQUIRE_THROWS_AS(io::read_volume((work_dir() / "furl.crvl").string()), std::runtime_error);
}

TEST_CASE("report json carries the schema and a config-stable digest") {
    harness::ExperimentReport rep;
    rep.experiment = "demo";
    rep.provenance = "unit";
    rep.status = harness::Status::pass;
    rep.wall_ms = 12.5;
    rep.checks.push_back({"alpha", 1.5, 1.0, 0.6, true});
    rep.checks.push_back({"beta", 0.0, 0.0, 0.0, true});

    json cfg{{"experiment", "demo"}, {"knob", 3}};
    json r = io::report_json(rep, cfg);
    REQUIRE(r.at("experiment") == "demo");
    REQUIRE(r.at("status") == "pass");
    REQUIRE(r.at("checks").size() == 2);
    REQUIRE(r.at("checks")[0].at("name") == "alpha");
    REQUIRE(r.at("checks")[0].at("measured") == 1.5);
    REQUIRE(r.at("checks")[0].at("pass") == true);
    REQUIRE(r.at("wall_ms") == 12.5);
    REQUIRE(r.at("config") == cfg);
    REQUIRE(r.at("config_digest") == io::config_digest(cfg));
    REQUIRE(io::config_digest(cfg) == io::config_digest(json{{"knob", 3}, {"experiment", "demo"}}));
    REQUIRE(io::config_digest(cfg) != io::config_digest(json{{"experiment", "demo"}, {"knob", 4}}));

    // timing never enters the fingerprint
    json r2 = r;
    r2["wall_ms"] = 99999.0;
    REQUIRE(io::report_fingerprint(r) == io::report_fingerprint(r2));
}

TEST_CASE("report csv is a flat stable view") {
    harness::ExperimentReport rep;
    rep.experiment = "demo";
    rep.checks.push_back({"alpha", 0.5, 1.0, 0.25, false});
    REQUIRE(io::report_csv(rep) ==
            "name,measured,reference,tol,pass\nalpha,0.5,1,0.25,0\n");
}

TEST_CASE("normalize injects every default") {
    json n = experiment::normalize(json{{"experiment", "transform"}});
    REQUIRE(n.at("phi").at("kind") == "gaussian");
    REQUIRE(n.at("phi").at("center") == json::array({0.0, 0.0, 0.0, 0.0}));
    REQUIRE(n.at("sphere").at("n_eta") == 6);
    REQUIRE(n.at("grid").at("count") == 25);
    REQUIRE(n.at("quad").at("n_r") == 64);
    REQUIRE(n.at("mode") == "automatic");
    REQUIRE(n.at("tol") == 1e-8);
    REQUIRE(!n.contains("output"));

    // normalization is idempotent
    REQUIRE(experiment::normalize(n) == n);

    json l = experiment::normalize(
        json{{"experiment", "lemma1"},
             {"phi", {{"kind", "bump"}, {"rho", 1.0}}},
             {"psi", {{"profile", {{"kind", "gauss"}}}}}});
    REQUIRE(l.at("params").at("probes") == 27);
    REQUIRE(l.at("params").at("s_n_r") == 20);
    REQUIRE(l.at("params").at("fwd").at("n_r") == 32);
    REQUIRE(l.at("psi").at("wfactor") == "one");
    REQUIRE(l.at("psi").at("s_center") == json::array({0.0, 0.0}));
}

TEST_CASE("unknown keys are rejected with their dotted path") {
    REQUIRE_THROWS_WITH(experiment::normalize(json{{"experiment", "transform"}, {"bogus", 1}}),
                        ContainsSubstring("bogus: unknown key"));
    REQUIRE_THROWS_WITH(
        experiment::normalize(json{{"experiment", "duality"},
                                   {"phi", {{"kind", "bump"}, {"rho", 1.0}}},
                                   {"f", {{"profile", {{"kind", "gauss"}}}}},
                                   {"params", {{"fwd", {{"n_rr", 3}}}}}}),
        ContainsSubstring("params.fwd.n_rr"));
    REQUIRE_THROWS_WITH(
        experiment::normalize(
            json{{"experiment", "support-forward"},
                 {"distribution",
                  {{"terms", json::array({{{"point", {{"at", {0, 0, 0, 0}}, {"mass", 2}}}}})}}},
                 {"set", {{"kind", "ball"}, {"center", {0, 0, 0, 0}}, {"radius", 1.0}}},
                 {"margin", 0.3}}),
        ContainsSubstring("distribution.terms[0].point.mass"));
}

TEST_CASE("missing and mistyped fields carry their path") {
    REQUIRE_THROWS_WITH(experiment::normalize(json{{"experiment", "duality"},
                                                   {"phi", {{"kind", "bump"}, {"rho", 1.0}}}}),
                        ContainsSubstring("f: missing required field"));
    REQUIRE_THROWS_WITH(
        experiment::normalize(json{{"experiment", "dual-bound"},
                                   {"h", {{"profile", {{"kind", "indicator"}, {"tmax", 1.0}}}}}}),
        ContainsSubstring("probes"));
    REQUIRE_THROWS_WITH(
        experiment::normalize(json{{"experiment", "transform"}, {"tol", "tight"}}),
        ContainsSubstring("tol: expected a number"));
    REQUIRE_THROWS_WITH(
        experiment::normalize(json{{"experiment", "transform"}, {"grid", {{"count", 10}}}}),
        ContainsSubstring("grid.count"));
    REQUIRE_THROWS_WITH(experiment::normalize(json{{"experiment", "warp"}}),
                        ContainsSubstring("unknown kind"));
    REQUIRE_THROWS_AS(experiment::normalize(json::array()), experiment::ConfigError);
}

TEST_CASE("object descriptors cover every kind and reject near misses") {
    auto norm_ok = [](const json& cfg) { return experiment::normalize(cfg); };

    // every profile kind through the dual-bound h slot
    for (json prof : {json{{"kind", "gauss"}},
                      json{{"kind", "bump"}, {"tmax", 1.0}},
                      json{{"kind", "bump_peak1"}, {"tmax", 1.0}, {"amp", 0.5}},
                      json{{"kind", "annular"}, {"a", 0.2}, {"b", 1.0}},
                      json{{"kind", "windowed_gauss"}, {"t0", 0.5}, {"t1", 2.0}},
                      json{{"kind", "indicator"}, {"tmax", 1.0}}}) {
        json cfg{{"experiment", "dual-bound"},
                 {"h", {{"profile", prof}}},
                 {"probes", json::array({{0, 0, 0, 0}})}};
        REQUIRE(norm_ok(cfg).at("h").at("profile").at("kind") == prof.at("kind"));
    }
    REQUIRE_THROWS_WITH(norm_ok(json{{"experiment", "dual-bound"},
                                     {"h", {{"profile", {{"kind", "sinc"}}}}},
                                     {"probes", json::array({{0, 0, 0, 0}})}}),
                        ContainsSubstring("unknown profile kind"));

    // the window wfactor needs its node and width, and only then
    json win{{"experiment", "dual-bound"},
             {"h",
              {{"profile", {{"kind", "bump"}, {"tmax", 1.0}}},
               {"wfactor", "window"},
               {"v", {1.0, 0.0, 0.0, 0.0}},
               {"width", 0.05}}},
             {"probes", json::array({{0, 0, 0, 0}})}};
    REQUIRE(norm_ok(win).at("h").at("width") == 0.05);
    win["h"].erase("width");
    REQUIRE_THROWS_WITH(norm_ok(win), ContainsSubstring("h.width"));
    json stray = win;
    stray["h"]["wfactor"] = "one";
    REQUIRE_THROWS_WITH(norm_ok(stray), ContainsSubstring("window wfactor"));

    // distribution terms carry exactly one measure
    json both{{"experiment", "support-forward"},
              {"distribution",
               {{"terms", json::array({{{"point", {{"at", {0, 0, 0, 0}}}},
                                        {"density", {{"kind", "gaussian"}}}}})}}},
              {"set", {{"kind", "ball"}, {"center", {0, 0, 0, 0}}, {"radius", 1.0}}},
              {"margin", 0.3}};
    REQUIRE_THROWS_WITH(norm_ok(both), ContainsSubstring("exactly one"));

    // nested sets normalize recursively
    json nested{{"experiment", "geometry"},
                {"set",
                 {{"kind", "dilation"},
                  {"base",
                   {{"kind", "union"},
                    {"parts", json::array({json{{"kind", "point"}, {"at", {0.5, 0, 0, 0}}},
                                           json{{"kind", "polydisc"},
                                                {"center", {0, 0, 0, 0}},
                                                {"r1", 0.25},
                                                {"r2", 0.5}}})}}},
                  {"eps", 0.1}}},
                {"expect", {{"complement_connected", true}}}};
    REQUIRE(norm_ok(nested).at("set").at("base").at("parts").size() == 2);
    REQUIRE_THROWS_WITH(norm_ok(json{{"experiment", "geometry"},
                                     {"set", {{"kind", "blob"}}},
                                     {"expect", {{"complement_connected", true}}}}),
                        ContainsSubstring("unknown set kind"));
}

TEST_CASE("overrides rewrite dot paths") {
    json cfg{{"experiment", "transform"}, {"grid", {{"count", 25}}}};
    experiment::apply_override(cfg, "grid.count=13");
    REQUIRE(cfg.at("grid").at("count") == 13);
    experiment::apply_override(cfg, "mode=analytic");
    REQUIRE(cfg.at("mode") == "analytic");
    experiment::apply_override(cfg, "phi.kind=gaussian");  // creates the object
    REQUIRE(cfg.at("phi").at("kind") == "gaussian");
    experiment::apply_override(cfg, "grid.center=[0.5,-0.5]");
    REQUIRE(cfg.at("grid").at("center") == json::array({0.5, -0.5}));

    REQUIRE_THROWS_AS(experiment::apply_override(cfg, "no-equals"), experiment::ConfigError);
    REQUIRE_THROWS_AS(experiment::apply_override(cfg, "=5"), experiment::ConfigError);
    REQUIRE_THROWS_WITH(experiment::apply_override(cfg, "mode.sub=1"),
                        ContainsSubstring("not an object"));
}

TEST_CASE("run executes a geometry config end to end") {
    experiment::RunResult rr = experiment::run(disk_geometry_config());
    REQUIRE(rr.report.status == harness::Status::pass);
    REQUIRE(rr.report.checks.size() == 2);
    REQUIRE(rr.artifacts.empty());
    REQUIRE(rr.config.at("resolution") == 96);
}

TEST_CASE("run writes requested artifacts") {
    fs::path dir = work_dir() / "artifacts";
    json cfg{{"experiment", "transform"},
             {"sphere", {{"n_eta", 4}, {"n_theta", 4}}},
             {"grid", {{"extent", 2.0}, {"count", 9}}},
             {"output", {{"sinogram", "dump.crdn"}}}};
    experiment::RunResult rr = experiment::run(cfg, dir.string());
    REQUIRE(rr.report.status == harness::Status::pass);
    REQUIRE(rr.artifacts.size() == 1);
    REQUIRE(fs::exists(rr.artifacts[0]));
    numerics::Sinogram S = io::read_sinogram(rr.artifacts[0]);
    REQUIRE(S.sphere.size() == 64);
    REQUIRE(S.grid.count == 9);
    REQUIRE(S.provenance == "forward:analytic");
}

TEST_CASE("run maps library precondition failures to config errors") {
    // a gaussian is not compactly supported, so duality must refuse it
    REQUIRE_THROWS_AS(experiment::run(json{{"experiment", "duality"},
                                           {"phi", {{"kind", "gaussian"}}},
                                           {"f", {{"profile", {{"kind", "gauss"}}}}}}),
                      experiment::ConfigError);
    // annulus radii validated by the set factory
    REQUIRE_THROWS_AS(
        experiment::run(json{{"experiment", "geometry"},
                             {"set", {{"kind", "annulus2d"}, {"rin", 0.9}, {"rout", 0.5}}},
                             {"expect", {{"complement_connected", false}}}}),
        experiment::ConfigError);
}

TEST_CASE("cli exit codes follow the contract") {
    fs::path pass_cfg = write_config("cli_pass.json", disk_geometry_config());
    fs::path out = work_dir() / "cli_pass_out";
    CliResult ok = cli("run " + pass_cfg.string() + " --out " + out.string());
    INFO(ok.err);
    REQUIRE(ok.code == 0);
    REQUIRE_THAT(ok.out, ContainsSubstring("geometry: pass"));
    REQUIRE(fs::exists(out / "report.json"));
    REQUIRE(fs::exists(out / "report.csv"));

    json wrong = disk_geometry_config();
    wrong["expect"]["components"] = 7;
    fs::path fail_cfg = write_config("cli_fail.json", wrong);
    REQUIRE(cli("run " + fail_cfg.string() + " --out " + (work_dir() / "f").string()).code == 1);

    json annulus{{"experiment", "support-converse"},
                 {"distribution", {{"terms", json::array({{{"point", {{"at", {0, 0, 0, 0}}}}}})}}},
                 {"set", {{"kind", "annulus2d"}, {"rin", 0.5}, {"rout", 1.0}}},
                 {"witness", {0, 0, 0, 0}},
                 {"params", {{"eta", 6}, {"theta", 6}, {"count", 49}}}};
    fs::path hv_cfg = write_config("cli_hv.json", annulus);
    CliResult hv = cli("run " + hv_cfg.string() + " --out " + (work_dir() / "hv").string());
    REQUIRE(hv.code == 2);
    REQUIRE_THAT(hv.out, ContainsSubstring("hypothesis_violated"));

    fs::path bad_cfg = write_config("cli_bad.json", json{{"experiment", "transform"},
                                                         {"grid", {{"extent", -1.0}}}});
    CliResult bad = cli("run " + bad_cfg.string());
    REQUIRE(bad.code == 64);
    REQUIRE_THAT(bad.err, ContainsSubstring("grid.extent"));

    spit(work_dir() / "mangled.json", "{nope");
    REQUIRE(cli("run " + (work_dir() / "mangled.json").string()).code == 64);
    REQUIRE(cli("run " + (work_dir() / "does_not_exist.json").string()).code == 64);
    REQUIRE(cli("").code == 64);
    REQUIRE(cli("--help").code == 0);

    // overrides pass through the same validation
    REQUIRE(cli("run " + pass_cfg.string() + " --out " + (work_dir() / "ov").string() +
                " --override resolution=48")
                .code == 0);
    REQUIRE(cli("run " + pass_cfg.string() + " --override resolution=8").code == 64);
}

TEST_CASE("cli reports are byte-stable across runs") {
    json cfg{{"experiment", "transform"},
             {"sphere", {{"n_eta", 4}, {"n_theta", 4}}},
             {"grid", {{"extent", 3.0}, {"count", 9}}},
             {"quad", {{"n_r", 16}, {"n_phi", 12}}},
             {"mode", "numeric"},
             {"tol", 1e-4}};
    fs::path p = write_config("cli_det.json", cfg);
    fs::path o1 = work_dir() / "det1", o2 = work_dir() / "det2";
    REQUIRE(cli("run " + p.string() + " --out " + o1.string()).code == 0);
    REQUIRE(cli("run " + p.string() + " --out " + o2.string()).code == 0);

    json r1 = json::parse(slurp(o1 / "report.json"));
    json r2 = json::parse(slurp(o2 / "report.json"));
    REQUIRE(io::report_fingerprint(r1) == io::report_fingerprint(r2));
    REQUIRE(slurp(o1 / "report.csv") == slurp(o2 / "report.csv"));
    REQUIRE(r1.at("config_digest") == r2.at("config_digest"));
}

TEST_CASE("cli fixtures listing validates entries") {
    fs::path dir = work_dir() / "fixture_pool";
    fs::create_directories(dir);
    spit(dir / "solid.json", disk_geometry_config().dump());
    spit(dir / "broken.json", "{oops");
    spit(dir / "mistyped.json", json{{"experiment", "transform"}, {"tol", "x"}}.dump());
    spit(dir / "notes.txt", "not a fixture");

    CliResult r = cli("fixtures", "CRADON_FIXTURES=" + dir.string());
    REQUIRE(r.code == 0);
    REQUIRE_THAT(r.out, ContainsSubstring("solid"));
    REQUIRE_THAT(r.out, ContainsSubstring("geometry"));
    REQUIRE_THAT(r.out, ContainsSubstring("broken"));
    REQUIRE_THAT(r.out, ContainsSubstring("[invalid]"));
    REQUIRE_THAT(r.out, ContainsSubstring("tol: expected a number"));
    REQUIRE_THAT(r.out, !ContainsSubstring("notes"));

    fs::path empty = work_dir() / "fixture_empty";
    fs::create_directories(empty);
    CliResult e = cli("fixtures", "CRADON_FIXTURES=" + empty.string());
    REQUIRE(e.code == 0);
    REQUIRE(e.out.empty());
}

TEST_CASE("cli calibrate subcommand reports the constant") {
    CliResult r = cli("calibrate --res 8");
    INFO(r.err);
    REQUIRE(r.code == 0);
    REQUIRE_THAT(r.out, ContainsSubstring("cn_estimate"));
    REQUIRE_THAT(r.out, ContainsSubstring("calibrate: pass"));
}
