// Experiment runner. `cradon run config.json` executes one experiment and
// writes report.json / report.csv plus any requested binary dumps; exit code
// 0 = all checks pass, 1 = a check failed or a numerical error, 2 = the
// experiment's hypotheses do not hold for the input, 64 = bad config/usage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cradon/experiment.hpp"

namespace fs = std::filesystem;
using cradon::experiment::ConfigError;
using json = nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitUsage = 64;

int status_code(cradon::harness::Status s) {
    switch (s) {
        case cradon::harness::Status::pass: return kExitPass;
        case cradon::harness::Status::hypothesis_violated: return kExitHypothesis;
        default: return kExitFail;
    }
}

void print_checks(const cradon::harness::ExperimentReport& rep) {
    for (const auto& c : rep.checks)
        std::printf("[%s] %-28s measured=%.10g reference=%.10g tol=%.3g\n",
                    c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.reference, c.tol);
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::vector<std::string>& overrides, bool verbose) {
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "cradon: cannot open %s\n", config_path.c_str());
        return kExitUsage;
    }
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        std::fprintf(stderr, "cradon: %s: %s\n", config_path.c_str(), e.what());
        return kExitUsage;
    }
    for (const std::string& ov : overrides) cradon::experiment::apply_override(raw, ov);

    cradon::experiment::RunResult rr = cradon::experiment::run(raw, out_dir);
    json report = cradon::io::report_json(rr.report, rr.config);

    fs::create_directories(out_dir);
    {
        std::ofstream rj(fs::path(out_dir) / "report.json", std::ios::trunc);
        rj << report.dump(2) << "\n";
    }
    {
        std::ofstream rc(fs::path(out_dir) / "report.csv", std::ios::trunc);
        rc << cradon::io::report_csv(rr.report);
    }

    if (verbose) {
        print_checks(rr.report);
        for (const std::string& a : rr.artifacts) std::printf("wrote %s\n", a.c_str());
    }
    std::printf("%s: %s (%zu checks, digest %s)\n", rr.report.experiment.c_str(),
                cradon::harness::status_name(rr.report.status), rr.report.checks.size(),
                report.at("config_digest").get<std::string>().c_str());
    return status_code(rr.report.status);
}

fs::path fixture_dir() {
    if (const char* env = std::getenv("CRADON_FIXTURES")) return env;
    if (fs::is_directory("fixtures")) return "fixtures";
#ifdef CRADON_FIXTURE_DIR
    return CRADON_FIXTURE_DIR;
#else
    return "fixtures";
#endif
}

int cmd_fixtures() {
    fs::path dir = fixture_dir();
    if (!fs::is_directory(dir)) return kExitPass;  // nothing shipped here: empty list
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        std::string name = f.stem().string();
        try {
            std::ifstream in(f);
            json cfg = cradon::experiment::normalize(json::parse(in));
            std::printf("%-32s %s\n", name.c_str(),
                        cfg.at("experiment").get<std::string>().c_str());
        } catch (const std::exception& e) {
            std::printf("%-32s [invalid] %s\n", name.c_str(), e.what());
        }
    }
    return kExitPass;
}

int cmd_calibrate(int res, bool verbose) {
    json cfg{{"experiment", "calibrate"}};
    if (res > 0) {
        cfg["n_eta"] = res;
        cfg["n_theta"] = std::max(4, (2 * res) / 3);
    }
    cradon::experiment::RunResult rr = cradon::experiment::run(cfg);
    print_checks(rr.report);
    if (verbose)
        std::printf("config: %s\n", rr.config.dump().c_str());
    std::printf("calibrate: %s\n", cradon::harness::status_name(rr.report.status));
    return status_code(rr.report.status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"complex Radon transform experiment runner"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a JSON experiment config");
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    bool verbose = false;
    run->add_option("config", config_path, "experiment description (JSON)")->required();
    run->add_option("--out", out_dir, "directory for reports and dumps");
    run->add_option("--override", overrides, "dot-path config override, key=value");
    run->add_flag("-v,--verbose", verbose, "print every check line");

    auto* fixtures = app.add_subcommand("fixtures", "list the shipped example configs");

    auto* calibrate = app.add_subcommand("calibrate", "estimate the inversion constant");
    int res = 0;
    calibrate->add_option("--res", res, "sphere rule eta count (theta scales along)");
    bool cal_verbose = false;
    calibrate->add_flag("-v,--verbose", cal_verbose, "echo the effective config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, overrides, verbose);
        if (fixtures->parsed()) return cmd_fixtures();
        return cmd_calibrate(res, cal_verbose);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "cradon: invalid config: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cradon: error: %s\n", e.what());
        return kExitFail;
    }
}
