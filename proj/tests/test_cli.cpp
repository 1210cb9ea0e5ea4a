#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include <sys/wait.h>

// End-to-end runs of the installed command line binary. Every test gets its
// own scratch directory; the binary path comes from the build system.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SMALLTIME_CLI_BIN) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    json j;
    in >> j;
    return j;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("help and version exit cleanly, junk does not") {
    const auto dir = scratch("usage");
    CHECK(run_cli("--help", dir / "help.log") == 0);
    CHECK(run_cli("--version", dir / "version.log") == 0);
    CHECK(run_cli("no-such-command", dir / "junk.log") == 1);
    CHECK(run_cli("bounds --no-such-flag", dir / "flag.log") == 1);
    CHECK(run_cli("", dir / "empty.log") == 1);  // a subcommand is required
}

TEST_CASE("bounds run writes its tables and manifest") {
    const auto dir = scratch("bounds");
    const int rc = run_cli("bounds --c 0.5 --t-grid 1e-6:1e-2:log:5 --out " + dir.string(),
                           dir / "run.log");
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "bounds.csv"));
    CHECK(fs::exists(dir / "expansion.csv"));

    const json manifest = read_json(dir / "manifest.json");
    CHECK(manifest["command"] == "bounds");
    CHECK(manifest["ok"] == true);
    CHECK(manifest["verdict"] == "pass");
    CHECK(manifest["config"]["c"] == 0.5);

    const json curve = read_json(dir / "bounds.json");
    REQUIRE(curve["rows"].size() == 5);
    // last grid point is t = 0.01; reference value for c = 0.5
    const double e_f1 = curve["rows"][4]["e_f1"].get<double>();
    CHECK(e_f1 == doctest::Approx(0.470825528367459695).epsilon(1e-12));

    const std::string csv = read_text(dir / "bounds.csv");
    CHECK(csv.rfind("t,f1,f2,e_f1,e_f2,expansion_lo,expansion_hi,p_lower,p_upper,in_horizon",
                    0) == 0);
}

TEST_CASE("bounds derives c from a model when not given") {
    const auto dir = scratch("bounds_model");
    const int rc = run_cli(
        "bounds --model GBM --param sigma=0.2 --param r=0.05 --x0 100 "
        "--t-grid 1e-4 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json curve = read_json(dir / "bounds.json");
    CHECK(curve["c"].get<double>() == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("bracket mode checks the model against the band") {
    const auto dir = scratch("bracket");
    const int rc = run_cli(
        "bounds --model DriftedBM --param b=0.5 --param sigma=1 --x0 0 "
        "--bracket --t-grid 1e-4:1e-2:log:3 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json rep = read_json(dir / "bracket.json");
    CHECK(rep["all_pass"] == true);
    CHECK(fs::exists(dir / "bracket.csv"));
}

TEST_CASE("ldp run reproduces the closed form rate") {
    const auto dir = scratch("ldp");
    const int rc = run_cli(
        "ldp --model GBM --param sigma=1 --param r=0 --x0 1 --eps 1 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json out = read_json(dir / "ldp.json");
    CHECK(out["rate"].get<double>() ==
          doctest::Approx(0.240226506959100712).epsilon(1e-9));

    const auto dir2 = scratch("ldp_const");
    CHECK(run_cli("ldp --sigma-const 2 --eps 1 --out " + dir2.string(), dir2 / "run.log") == 0);
    const json out2 = read_json(dir2 / "ldp.json");
    CHECK(out2["rate"].get<double>() == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(out2["rate_const_sigma"].get<double>() == doctest::Approx(0.125).epsilon(1e-12));

    CHECK(run_cli("ldp --sigma-const 2 --out " + dir2.string(), dir2 / "err.log") == 1);
}

TEST_CASE("clt-check reports a consistent verdict for gbm") {
    const auto dir = scratch("clt");
    const int rc = run_cli(
        "clt-check --model GBM --param sigma=0.2 --param r=0.05 --x0 100 --mapping log "
        "--paths 20000 --t-schedule 1e-2:1e-6:log:3 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json manifest = read_json(dir / "manifest.json");
    CHECK(manifest["verdict"] == "consistent");
    const std::string csv = read_text(dir / "clt_report.csv");
    CHECK(csv.rfind("t,direction_id,ks_stat,critical,pass", 0) == 0);
    // exact sampling was selected automatically for this model
    CHECK(read_json(dir / "clt_report.json")["limit"]["degenerate"] == false);
}

TEST_CASE("expected verdict controls the exit code") {
    const auto dir = scratch("expect");
    const std::string base =
        "clt-check --model SquaredBM --x0 0 --paths 20000 --t-schedule 1e-2:1e-6:log:2 ";
    CHECK(run_cli(base + "--out " + dir.string(), dir / "bare.log") == 2);
    CHECK(run_cli(base + "--expect degenerate --out " + dir.string(), dir / "expect.log") == 0);

    const json manifest = read_json(dir / "manifest.json");
    CHECK(manifest["verdict"] == "degenerate");
    CHECK(manifest["expected"] == "degenerate");
}

TEST_CASE("digital strike mode brackets the closed form probability") {
    const auto dir = scratch("digital");
    const int rc = run_cli(
        "digital --model GBM --param sigma=0.2 --param r=0.05 --x0 100 "
        "--strike 100 --T 1e-4 --paths 200000 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json est = read_json(dir / "digital.json");
    CHECK(est["exact"] == true);
    const double target = 0.500595910210388681;  // Phi((r - sigma^2/2) sqrt(T) / sigma)
    CHECK(est["prob_ci"][0].get<double>() <= target);
    CHECK(target <= est["prob_ci"][1].get<double>());
}

TEST_CASE("digital schedule mode tracks the limit") {
    const auto dir = scratch("digital_sched");
    const int rc = run_cli(
        "digital --model GBM --param sigma=0.2 --param r=0.05 --x0 100 "
        "--paths 100000 --t-schedule 1e-2:1e-4:log:2 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json rep = read_json(dir / "digital.json");
    CHECK(rep["verdict"] == "pass");
    const std::string csv = read_text(dir / "digital.csv");
    CHECK(csv.rfind("T,prob,ci_low,ci_high,contains_half", 0) == 0);
}

TEST_CASE("skew run with analytic pricing passes both bands") {
    const auto dir = scratch("skew");
    const int rc = run_cli(
        "skew --model GBM --param sigma=0.2 --param r=0.05 --x0 100 --analytic "
        "--t-schedule 0.25:0.0009765625:log:9 --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json rep = read_json(dir / "skew.json");
    REQUIRE(rep["reports"].size() == 9);
    CHECK(rep["width_ratio_check"]["pass"] == true);
    CHECK(rep["width_ratio_check"]["max_rel_dev"].get<double>() <= 0.10);
    const std::string csv = read_text(dir / "skew.csv");
    CHECK(csv.rfind("T,slope_est,slope_se", 0) == 0);
}

TEST_CASE("examples runs write their trend tables") {
    const auto dir = scratch("examples");
    const int rc = run_cli(
        "examples --name quantile --p 0.7 --paths 20000 --t-schedule 1e-2:1e-4:log:2 "
        "--out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "quantile.csv"));
    const json meta = read_json(dir / "examples.json");
    CHECK(meta["name"] == "quantile");
    CHECK(meta["model"]["kind"] == "QuantileDriftBM");

    CHECK(run_cli("examples --name nothing --out " + dir.string(), dir / "bad.log") == 1);
}

TEST_CASE("model files and config files feed the run") {
    const auto dir = scratch("files");
    {
        std::ofstream m(dir / "model.json");
        m << R"({"kind":"DriftedBM","params":{"b":0.5,"sigma":1.0},"x0":[0.0]})";
    }
    {
        std::ofstream c(dir / "config.json");
        c << R"({"t_grid":"1e-4:1e-2:log:3","expansion":false})";
    }
    const int rc = run_cli(
        "bounds --model-file " + (dir / "model.json").string() +
        " --config " + (dir / "config.json").string() + " --out " + dir.string(),
        dir / "run.log");
    CHECK(rc == 0);
    const json manifest = read_json(dir / "manifest.json");
    CHECK(manifest["config"]["model"]["kind"] == "DriftedBM");
    CHECK_FALSE(fs::exists(dir / "expansion.csv"));  // config switched it off
    const json curve = read_json(dir / "bounds.json");
    CHECK(curve["c"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(curve["rows"].size() == 3);
}

TEST_CASE("invalid model parameters exit with an error") {
    const auto dir = scratch("invalid");
    CHECK(run_cli("bounds --model GBM --param sigma=-1 --param r=0 --x0 100 --out " +
                      dir.string(),
                  dir / "run.log") == 1);
    CHECK(run_cli("clt-check --model GBM --param sigma=0.2 --x0 100 --out " + dir.string(),
                  dir / "run2.log") == 1);  // missing r
}

TEST_CASE("reproduce runs every config and summarizes") {
    const auto dir = scratch("reproduce");
    const auto cfgs = dir / "configs";
    fs::create_directories(cfgs);
    {
        std::ofstream a(cfgs / "bounds_small.json");
        a << R"({"cmd":"bounds","c":0.5,"t_grid":"1e-4:1e-2:log:3","expansion":false})";
    }
    {
        std::ofstream b(cfgs / "quantile_pinned.json");
        b << R"({"cmd":"examples","name":"quantile","p":0.7,"paths":20000,)"
          << R"("t_schedule":[0.01,0.0001],"seed":42})";
    }
    const int rc = run_cli("reproduce --dir " + cfgs.string() + " --out " + dir.string(),
                           dir / "run.log");
    CHECK(rc == 0);

    const json summary = read_json(dir / "summary.json");
    REQUIRE(summary.size() == 2);
    for (const auto& row : summary) CHECK(row["ok"] == true);
    CHECK(fs::exists(dir / "bounds_small" / "manifest.json"));
    CHECK(fs::exists(dir / "quantile_pinned" / "quantile.csv"));

    const std::string log = read_text(dir / "run.log");
    CHECK(log.find("OK") != std::string::npos);
    CHECK(log.find("MISMATCH") == std::string::npos);
}

TEST_CASE("reruns with the same seed are byte identical across thread counts") {
    const auto one = scratch("thread_one");
    const auto four = scratch("thread_four");
    const std::string base =
        "clt-check --model GBM --param sigma=0.2 --param r=0.05 --x0 100 --mapping log "
        "--paths 20000 --seed 7 --t-schedule 1e-2:1e-6:log:2 ";
    CHECK(run_cli(base + "--threads 1 --out " + one.string(), one / "run.log") == 0);
    CHECK(run_cli(base + "--threads 4 --out " + four.string(), four / "run.log") == 0);
    CHECK(read_text(one / "clt_report.csv") == read_text(four / "clt_report.csv"));
}
