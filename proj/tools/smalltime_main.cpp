// Command line front end. Every subcommand reads an optional JSON config
// (flags override file values), writes its tables and a manifest into --out,
// and exits 0 when the run's verdict matches the expected one, 2 when it
// does not, 1 on any usage or runtime error. Counterexample configs declare
// "expect" so that an intended degenerate or inconsistent verdict counts as
// success for the reproduction suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smalltime/bounds.hpp"
#include "smalltime/clt.hpp"
#include "smalltime/errors.hpp"
#include "smalltime/models.hpp"
#include "smalltime/pricing.hpp"
#include "smalltime/simulate.hpp"
#include "smalltime/skew.hpp"
#include "smalltime/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smalltime;

namespace {

// ------------------------------------------------------------
// Config plumbing
// ------------------------------------------------------------

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// "a:b:log:n", "a:b:lin:n", a comma list, or a single number.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() == 4) {
        const double a = std::stod(parts[0]);
        const double b = std::stod(parts[1]);
        const long n = std::stol(parts[3]);
        if (n < 1) throw BadInput("grid needs at least one point: " + text);
        if (n == 1) return {a};
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(n));
        if (parts[2] == "log") {
            if (!(a > 0.0) || !(b > 0.0)) throw BadInput("log grid needs positive endpoints");
            for (long i = 0; i < n; ++i)
                out.push_back(a * std::pow(b / a, static_cast<double>(i) /
                                                       static_cast<double>(n - 1)));
        } else if (parts[2] == "lin") {
            for (long i = 0; i < n; ++i)
                out.push_back(a + (b - a) * static_cast<double>(i) /
                                      static_cast<double>(n - 1));
        } else {
            throw BadInput("grid mode must be log or lin: " + text);
        }
        return out;
    }
    std::vector<double> out;
    std::stringstream cs(text);
    while (std::getline(cs, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw BadInput("empty grid: " + text);
    return out;
}

std::vector<double> grid_from(const json& v) {
    if (v.is_string()) return parse_grid(v.get<std::string>());
    if (v.is_array()) return v.get<std::vector<double>>();
    if (v.is_number()) return {v.get<double>()};
    throw BadInput("grid must be a string, array, or number");
}

// Effective run configuration: the --config file contents with every flag
// that was set on the command line written over it.
struct ConfigBuilder {
    json cfg = json::object();

    void merge_file(const std::string& path) {
        json base = load_json_file(path);
        if (!base.is_object()) throw BadInput("config must be a JSON object: " + path);
        base.update(cfg);  // flags set before merge win
        cfg = std::move(base);
    }
    void set_if(const CLI::Option* opt, const std::string& key, const json& value) {
        if (opt->count() > 0) cfg[key] = value;
    }
    void default_to(const std::string& key, const json& value) {
        if (!cfg.contains(key)) cfg[key] = value;
    }
};

models::ModelSpec model_from_cfg(const json& cfg) {
    if (!cfg.contains("model")) throw BadInput("a model is required (--model or config)");
    return models::ModelSpec::from_json(cfg.at("model"));
}

// scheme "auto" (the default) picks exact sampling whenever the model's law
// admits it for the requested kind of run, and Euler stepping otherwise.
sim::SimConfig sim_from_cfg(const json& cfg, const models::ModelSpec* model = nullptr,
                            bool paths_mode = false) {
    sim::SimConfig sc;
    sc.n_paths = cfg.value("paths", std::size_t{100000});
    sc.seed = cfg.value("seed", std::uint64_t{42});
    sc.threads = cfg.value("threads", 0);
    sc.h_max = cfg.value("h_max", 0.0);
    const std::string scheme = cfg.value("scheme", std::string("auto"));
    if (scheme == "exact") {
        sc.scheme = sim::Scheme::Exact;
    } else if (scheme == "euler") {
        sc.scheme = sim::Scheme::EulerMaruyama;
    } else if (scheme == "auto") {
        if (model && pricing::exact_terminal_available(*model) &&
            !(paths_mode && model->kind == models::Kind::SquaredBessel))
            sc.scheme = sim::Scheme::Exact;
    } else {
        throw BadInput("scheme must be auto, euler, or exact");
    }
    return sc;
}

struct RunResult {
    std::string verdict;
    std::string expected;
    bool ok = false;
};

RunResult finish(const json& cfg, const std::string& verdict,
                 const std::string& default_expect) {
    RunResult r;
    r.verdict = verdict;
    r.expected = cfg.value("expect", default_expect);
    r.ok = r.verdict == r.expected;
    return r;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& cfg,
                    const RunResult& result, const std::vector<std::string>& outputs,
                    double wall_seconds) {
    json m;
    m["command"] = command;
    m["version"] = SMALLTIME_VERSION;
    m["config"] = cfg;
    m["outputs"] = outputs;
    m["verdict"] = result.verdict;
    m["expected"] = result.expected;
    m["ok"] = result.ok;
    m["wall_seconds"] = wall_seconds;
    write_json_file(out_dir / "manifest.json", m);
}

template <class Fn>
void write_text(const fs::path& path, Fn&& emit) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot write " + path.string());
    emit(out);
}

// ------------------------------------------------------------
// Subcommand cores. Each takes the effective config and the output
// directory and returns the verdict; the CLI layer and the reproduce
// driver both call these.
// ------------------------------------------------------------

RunResult run_clt_check(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const models::ModelSpec model = model_from_cfg(cfg);
    const auto mapping = clt::mapping_from_name(cfg.value("mapping", std::string("identity")),
                                                model.dim);
    const std::vector<double> schedule =
        grid_from(cfg.contains("t_schedule") ? cfg.at("t_schedule") : json("1e-2:1e-6:log:3"));
    const clt::CltReport rep = clt::clt_check(model, mapping, schedule, sim_from_cfg(cfg, &model),
                                              cfg.value("level", 0.001));
    write_text(out / "clt_report.csv", [&](std::ostream& os) { rep.write_csv(os); });
    write_json_file(out / "clt_report.json", rep.to_json());
    files = {"clt_report.csv", "clt_report.json"};
    return finish(cfg, clt::verdict_name(rep.verdict), "consistent");
}

RunResult run_fclt_check(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const models::ModelSpec model = model_from_cfg(cfg);
    const auto mapping = clt::mapping_from_name(cfg.value("mapping", std::string("identity")),
                                                model.dim);
    const std::vector<double> u_schedule =
        grid_from(cfg.contains("u_schedule") ? cfg.at("u_schedule") : json("1e-2:1e-4:log:2"));
    const std::vector<double> grid =
        grid_from(cfg.contains("grid") ? cfg.at("grid") : json{{0.0, 0.25, 0.5, 0.75, 1.0}});
    const clt::FcltReport rep = clt::fclt_check(model, mapping, u_schedule, grid,
                                                sim_from_cfg(cfg, &model, true), cfg.value("level", 0.001));
    write_text(out / "fclt_report.csv", [&](std::ostream& os) { rep.write_csv(os); });
    write_json_file(out / "fclt_report.json", rep.to_json());
    files = {"fclt_report.csv", "fclt_report.json"};
    return finish(cfg, clt::verdict_name(rep.verdict), "consistent");
}

RunResult run_bounds(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    double c = 0.0;
    std::optional<models::ModelSpec> model;
    if (cfg.contains("model")) model = model_from_cfg(cfg);
    if (cfg.contains("c"))
        c = cfg.at("c").get<double>();
    else if (model)
        c = bounds::drift_bound_for_model(*model);
    else
        throw BadInput("bounds needs --c or a model to derive it from");

    const std::vector<double> t_grid =
        grid_from(cfg.contains("t_grid") ? cfg.at("t_grid") : json("1e-8:1e-1:log:25"));
    const bounds::BoundsCurve curve = bounds::girsanov_bounds(c, t_grid);
    write_text(out / "bounds.csv", [&](std::ostream& os) { curve.write_csv(os); });
    write_json_file(out / "bounds.json", curve.to_json());
    files = {"bounds.csv", "bounds.json"};

    if (cfg.value("expansion", true)) {
        const auto rows = bounds::expansion_error(c, t_grid);
        write_text(out / "expansion.csv", [&](std::ostream& os) {
            os << "t,lower_ratio,upper_ratio\n";
            char buf[128];
            for (const auto& r : rows) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.t, r.lower_ratio,
                              r.upper_ratio);
                os << buf;
            }
        });
        files.push_back("expansion.csv");
    }

    std::string verdict = "pass";
    if (cfg.value("bracket", false)) {
        if (!model) throw BadInput("bracketing check needs a model");
        const bounds::BracketReport rep =
            bounds::verify_bracketing(*model, t_grid, sim_from_cfg(cfg, &*model));
        write_text(out / "bracket.csv", [&](std::ostream& os) { rep.write_csv(os); });
        write_json_file(out / "bracket.json", rep.to_json());
        files.push_back("bracket.csv");
        files.push_back("bracket.json");
        verdict = rep.all_pass ? "pass" : "fail";
    }
    return finish(cfg, verdict, "pass");
}

RunResult run_digital(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const models::ModelSpec model = model_from_cfg(cfg);

    // One-off price when a strike is pinned; otherwise the vanishing-maturity
    // trend of the at-the-money digital.
    if (cfg.contains("strike")) {
        const double strike = cfg.at("strike").get<double>();
        const double t = cfg.value("T", 0.01);
        pricing::RateCurve rc = pricing::RateCurve::constant(model.param_or("r", 0.0));
        if (cfg.contains("rates")) {
            rc.rates = cfg.at("rates").get<std::vector<double>>();
            rc.times = cfg.value("times", std::vector<double>{});
        }
        const pricing::DigitalEstimate est =
            pricing::mc_digital(model, strike, t, rc, sim_from_cfg(cfg),
                                cfg.value("confidence", 0.99));
        write_json_file(out / "digital.json",
                        json{{"T", est.t},
                             {"strike", est.k},
                             {"discount", est.discount},
                             {"prob", est.prob},
                             {"prob_ci", {est.prob_ci_low, est.prob_ci_high}},
                             {"price", est.price},
                             {"price_ci", {est.price_ci_low, est.price_ci_high}},
                             {"n_paths", est.n_paths},
                             {"exact", est.exact}});
        files = {"digital.json"};
        return finish(cfg, "pass", "pass");
    }

    const std::vector<double> schedule =
        grid_from(cfg.contains("t_schedule") ? cfg.at("t_schedule") : json("1e-1:1e-4:log:4"));
    const pricing::AtmDigitalReport rep = pricing::atm_digital_limit_check(
        model, schedule, sim_from_cfg(cfg), cfg.value("confidence", 0.99),
        cfg.value("strict", false));
    write_text(out / "digital.csv", [&](std::ostream& os) { rep.write_csv(os); });
    write_json_file(out / "digital.json", rep.to_json());
    files = {"digital.csv", "digital.json"};
    return finish(cfg, pricing::limit_verdict_name(rep.verdict), "pass");
}

RunResult run_skew(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const models::ModelSpec model = model_from_cfg(cfg);
    const std::vector<double> schedule = grid_from(
        cfg.contains("t_schedule") ? cfg.at("t_schedule") : json("0.25:0.0009765625:log:9"));
    const bool analytic = cfg.value("analytic", false);
    const sim::SimConfig base = sim_from_cfg(cfg);

    std::vector<skew::SkewReport> reports;
    bool all_in = true;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        sim::SimConfig sc = base;
        sc.seed = rng::derive_seed(base.seed, i);
        skew::SkewReport rep = skew::compare_bounds(model, schedule[i], sc, analytic);
        all_in = all_in && rep.in_model_free == skew::BandVerdict::Inside &&
                 rep.in_clt != skew::BandVerdict::Outside;
        reports.push_back(std::move(rep));
    }

    json j;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(r.to_json());

    bool width_ok = true;
    const bool have_clt = !reports.empty() &&
                          reports.front().in_clt != skew::BandVerdict::NotApplicable;
    if (reports.size() >= 2 && have_clt) {
        const skew::WidthRatioCheck chk =
            skew::width_ratio_check(reports, cfg.value("width_tol", 0.10));
        width_ok = chk.pass;
        j["width_ratio_check"] = {{"reference", chk.reference},
                                  {"max_rel_dev", chk.max_rel_dev},
                                  {"pass", chk.pass}};
    }

    write_text(out / "skew.csv", [&](std::ostream& os) { skew::write_csv(os, reports); });
    write_json_file(out / "skew.json", j);
    files = {"skew.csv", "skew.json"};
    return finish(cfg, all_in && width_ok ? "pass" : "fail", "pass");
}

RunResult run_ldp(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    if (!cfg.contains("eps")) throw BadInput("ldp needs --eps");
    const double eps = cfg.at("eps").get<double>();

    double x0 = 0.0;
    std::function<double(double)> sigma;
    if (cfg.contains("model")) {
        const models::ModelSpec model = model_from_cfg(cfg);
        if (model.dim != 1) throw BadInput("ldp handles scalar models only");
        const models::CoefficientView view = models::coefficients(model);
        sigma = [view](double u) { return view.diffusion(0.0, {u})(0, 0); };
        x0 = model.observable_start()[0];
    } else if (cfg.contains("sigma_const")) {
        const double s = cfg.at("sigma_const").get<double>();
        sigma = [s](double) { return s; };
    } else {
        throw BadInput("ldp needs a model or --sigma-const");
    }
    if (cfg.contains("x0") && cfg.at("x0").is_number()) x0 = cfg.at("x0").get<double>();

    const double rate = clt::ldp_rate(sigma, x0, eps, cfg.value("tol", 1e-10));
    json j{{"x0", x0}, {"eps", eps}, {"rate", rate}};
    if (cfg.contains("sigma_const")) {
        const double s = cfg.at("sigma_const").get<double>();
        j["rate_const_sigma"] = eps * eps / (2.0 * s * s);
    }
    write_json_file(out / "ldp.json", j);
    files = {"ldp.json"};
    std::printf("ldp rate(x0=%g, eps=%g) = %.12g\n", x0, eps, rate);
    return finish(cfg, "pass", "pass");
}

// Named demonstration runs: each tracks P(X_t > level_t) along a maturity
// schedule next to the analytic trend where one exists.
RunResult run_examples(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const std::string name = cfg.value("name", std::string());
    const std::vector<double> schedule =
        grid_from(cfg.contains("t_schedule") ? cfg.at("t_schedule") : json("1e-1:1e-6:log:6"));
    const sim::SimConfig base = sim_from_cfg(cfg);

    models::ModelSpec model;
    std::function<double(double)> level;     // threshold per maturity
    std::function<double(double)> analytic;  // exact P(X_t > level), when known
    if (name == "bessel") {
        const double delta = cfg.value("delta", 2.0);
        model = models::make_model(models::Kind::SquaredBessel, {{"delta", delta}}, {0.0});
        level = [delta](double t) { return delta * t; };
        analytic = [delta](double t) {
            return 1.0 - stats::gamma_cdf(delta * t, delta / 2.0, 2.0 * t);
        };
    } else if (name == "poisson") {
        const double rate = cfg.value("rate", 1.0);
        model = models::make_model(models::Kind::PoissonMartingale, {{"rate", rate}}, {0.0});
        level = [](double) { return 0.0; };
        analytic = [rate](double t) { return std::exp(-rate * t); };
    } else if (name == "squared-bm") {
        model = models::make_model(models::Kind::SquaredBM, {}, {0.0});
        level = [](double) { return 0.0; };
        analytic = [](double) { return 1.0; };
    } else if (name == "quantile") {
        const double p = cfg.value("p", 0.7);
        model = models::make_model(models::Kind::QuantileDriftBM, {{"p", p}}, {0.0});
        level = [](double) { return 0.0; };
        analytic = [p](double) { return p; };
    } else {
        throw BadInput("unknown example '" + name +
                       "' (bessel, poisson, squared-bm, quantile)");
    }

    std::ostringstream table;
    table << "t,level,prob,ci_low,ci_high,analytic\n";
    char buf[192];
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double t = schedule[i];
        sim::SimConfig sc = base;
        sc.seed = rng::derive_seed(base.seed, i);
        sc.scheme = sim::Scheme::Exact;
        const sim::MCSample sample = sim::simulate_terminal(model, t, sc);
        const stats::ProbEstimate est = sim::prob_exceed(sample, 0, level(t));
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, level(t),
                      est.p_hat, est.ci_low, est.ci_high, analytic(t));
        table << buf;
        std::printf("t=%-12.6g P(X_t > %.6g) = %.4f  [%.4f, %.4f]  analytic %.4f\n", t,
                    level(t), est.p_hat, est.ci_low, est.ci_high, analytic(t));
    }
    write_text(out / (name + ".csv"), [&](std::ostream& os) { os << table.str(); });
    write_json_file(out / "examples.json",
                    json{{"name", name}, {"model", model.to_json()}, {"t_schedule", schedule}});
    files = {name + ".csv", "examples.json"};
    return finish(cfg, "pass", "pass");
}

RunResult dispatch(const std::string& cmd, const json& cfg, const fs::path& out,
                   std::vector<std::string>& files) {
    if (cmd == "clt-check") return run_clt_check(cfg, out, files);
    if (cmd == "fclt-check") return run_fclt_check(cfg, out, files);
    if (cmd == "bounds") return run_bounds(cfg, out, files);
    if (cmd == "digital") return run_digital(cfg, out, files);
    if (cmd == "skew") return run_skew(cfg, out, files);
    if (cmd == "ldp") return run_ldp(cfg, out, files);
    if (cmd == "examples") return run_examples(cfg, out, files);
    throw BadInput("unknown command in config: " + cmd);
}

RunResult run_reproduce(const json& cfg, const fs::path& out, std::vector<std::string>& files) {
    const std::string dir = cfg.value("dir", std::string("repro"));
    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") configs.push_back(entry.path());
    std::sort(configs.begin(), configs.end());
    if (configs.empty()) throw BadInput("no .json configs under " + dir);

    json summary = json::array();
    bool all_ok = true;
    for (const fs::path& path : configs) {
        const json run_cfg = load_json_file(path.string());
        const std::string cmd = run_cfg.value("cmd", std::string());
        const fs::path run_out = out / path.stem();
        fs::create_directories(run_out);
        const auto started = std::chrono::steady_clock::now();
        std::vector<std::string> run_files;
        const RunResult r = dispatch(cmd, run_cfg, run_out, run_files);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_manifest(run_out, cmd, run_cfg, r, run_files, secs);
        all_ok = all_ok && r.ok;
        std::printf("%-9s %-28s verdict=%-14s expected=%-14s\n", r.ok ? "OK" : "MISMATCH",
                    path.stem().string().c_str(), r.verdict.c_str(), r.expected.c_str());
        summary.push_back(json{{"name", path.stem().string()},
                               {"cmd", cmd},
                               {"verdict", r.verdict},
                               {"expected", r.expected},
                               {"ok", r.ok},
                               {"wall_seconds", secs}});
    }
    write_json_file(out / "summary.json", summary);
    files = {"summary.json"};
    RunResult total;
    total.verdict = all_ok ? "pass" : "fail";
    total.expected = "pass";
    total.ok = all_ok;
    return total;
}

// ------------------------------------------------------------
// Flag layer
// ------------------------------------------------------------

struct CommonFlags {
    std::string config_file, out_dir;
    std::string model_name, model_file;
    std::vector<std::string> params;
    std::vector<double> x0;
    std::size_t dim = 1;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    int threads = 0;
    double h_max = 0.0;
    std::string expect;

    CLI::Option *o_model = nullptr, *o_model_file = nullptr, *o_dim = nullptr;
    CLI::Option *o_paths = nullptr, *o_seed = nullptr, *o_threads = nullptr;
    CLI::Option *o_h_max = nullptr, *o_expect = nullptr;

    void attach(CLI::App* app, bool with_model) {
        app->add_option("--config", config_file, "JSON config; flags override its keys");
        app->add_option("--out", out_dir, "output directory");
        o_paths = app->add_option("--paths", paths, "Monte Carlo paths");
        o_seed = app->add_option("--seed", seed, "base RNG seed");
        o_threads = app->add_option("--threads", threads, "worker threads (0: auto)");
        o_h_max = app->add_option("--h-max", h_max, "Euler substep cap (0: auto)");
        o_expect = app->add_option("--expect", expect, "expected verdict for exit code 0");
        if (with_model) {
            o_model = app->add_option("--model", model_name, "model kind name");
            o_model_file = app->add_option("--model-file", model_file, "model spec JSON file");
            app->add_option("--param", params, "model parameter name=value")
                ->take_all();
            app->add_option("--x0", x0, "initial state")->take_all();
            o_dim = app->add_option("--dim", dim, "state dimension");
        }
    }

    json build_model_json() const {
        json m;
        m["kind"] = model_name;
        m["params"] = json::object();
        for (const std::string& kv : params) {
            const auto pos = kv.find('=');
            if (pos == std::string::npos || pos == 0)
                throw BadInput("--param expects name=value, got '" + kv + "'");
            m["params"][kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
        }
        m["x0"] = x0.empty() ? std::vector<double>{0.0} : x0;
        m["dim"] = o_dim->count() > 0 ? dim : m["x0"].size();
        return m;
    }

    json finalize(const std::string& default_out) {
        ConfigBuilder b;
        b.set_if(o_paths, "paths", paths);
        b.set_if(o_seed, "seed", seed);
        b.set_if(o_threads, "threads", threads);
        b.set_if(o_h_max, "h_max", h_max);
        b.set_if(o_expect, "expect", expect);
        if (o_model_file && o_model_file->count() > 0)
            b.cfg["model"] = load_json_file(model_file);
        else if (o_model && o_model->count() > 0)
            b.cfg["model"] = build_model_json();
        if (!config_file.empty()) b.merge_file(config_file);
        if (out_dir.empty()) out_dir = default_out;
        return b.cfg;
    }
};

int execute(const std::string& cmd, json cfg, const std::string& out_dir) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::string> files;
    const RunResult r = cmd == "reproduce" ? run_reproduce(cfg, out, files)
                                           : dispatch(cmd, cfg, out, files);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(out, cmd, cfg, r, files, secs);
    std::printf("%s: verdict=%s expected=%s out=%s (%.2fs)\n", cmd.c_str(), r.verdict.c_str(),
                r.expected.c_str(), out_dir.c_str(), secs);
    return r.ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"small-time limit checks, probability bounds, and skew bands"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(SMALLTIME_VERSION));

    struct Sub {
        CLI::App* cli = nullptr;
        CommonFlags flags;
        // extra string/double/bool options, written into cfg when seen
        std::vector<std::pair<CLI::Option*, std::function<json()>>> extras;
        std::map<std::string, std::string> str_vals;
        std::map<std::string, double> num_vals;
        std::map<std::string, bool> bool_vals;

        void opt_str(const std::string& flag, const std::string& key, const std::string& desc) {
            auto* o = cli->add_option(flag, str_vals[key], desc);
            extras.emplace_back(o, [this, key]() { return json(str_vals.at(key)); });
            keys.push_back(key);
        }
        void opt_num(const std::string& flag, const std::string& key, const std::string& desc) {
            auto* o = cli->add_option(flag, num_vals[key], desc);
            extras.emplace_back(o, [this, key]() { return json(num_vals.at(key)); });
            keys.push_back(key);
        }
        void opt_bool(const std::string& flag, const std::string& key, const std::string& desc) {
            auto* o = cli->add_flag(flag, bool_vals[key], desc);
            extras.emplace_back(o, [this, key]() { return json(bool_vals.at(key)); });
            keys.push_back(key);
        }
        std::vector<std::string> keys;

        json to_cfg(const std::string& default_out) {
            json cfg = flags.finalize(default_out);
            for (std::size_t i = 0; i < extras.size(); ++i)
                if (extras[i].first->count() > 0) cfg[keys[i]] = extras[i].second();
            return cfg;
        }
    };
    std::map<std::string, Sub> subs;

    const auto add_sub = [&](const std::string& name, const std::string& desc,
                             bool with_model) -> Sub& {
        Sub& s = subs[name];
        s.cli = app.add_subcommand(name, desc);
        s.flags.attach(s.cli, with_model);
        return s;
    };

    {
        Sub& s = add_sub("clt-check", "normalized increments against the Gaussian limit", true);
        s.opt_str("--mapping", "mapping", "identity, log, or square");
        s.opt_str("--t-schedule", "t_schedule", "maturities, e.g. 1e-2:1e-6:log:3");
        s.opt_num("--level", "level", "KS test level");
    }
    {
        Sub& s = add_sub("fclt-check", "scaled path law against Brownian motion", true);
        s.opt_str("--mapping", "mapping", "identity, log, or square");
        s.opt_str("--u-schedule", "u_schedule", "time scales, e.g. 1e-2:1e-4:log:2");
        s.opt_str("--grid", "grid", "normalized grid starting at 0, e.g. 0,0.25,0.5,0.75,1");
        s.opt_num("--level", "level", "KS test level");
    }
    {
        Sub& s = add_sub("bounds", "two-sided bounds on P(X_t > x0)", true);
        s.opt_num("--c", "c", "drift-to-volatility bound");
        s.opt_str("--t-grid", "t_grid", "time grid, e.g. 1e-6:1e-1:log:20");
        s.opt_bool("--bracket", "bracket", "verify the bound brackets the model probability");
    }
    {
        Sub& s = add_sub("digital", "at-the-money digital and its small-maturity limit", true);
        s.opt_str("--t-schedule", "t_schedule", "maturity schedule");
        s.opt_num("--strike", "strike", "price one digital at this strike instead");
        s.opt_num("--T", "T", "maturity for --strike mode");
        s.opt_num("--confidence", "confidence", "interval confidence");
        s.opt_bool("--strict", "strict", "error out on degenerate-limit models");
    }
    {
        Sub& s = add_sub("skew", "ATM implied volatility slope against both bands", true);
        s.opt_str("--t-schedule", "t_schedule", "maturity schedule");
        s.opt_bool("--analytic", "analytic", "closed-form prices instead of Monte Carlo");
        s.opt_num("--width-tol", "width_tol", "tolerance for the sqrt(T) width-ratio law");
    }
    {
        Sub& s = add_sub("ldp", "large-deviation decay rate of an up-crossing", true);
        s.opt_num("--eps", "eps", "level offset above the start");
        s.opt_num("--sigma-const", "sigma_const", "constant volatility (instead of a model)");
        s.opt_num("--start", "x0", "start point override");
        s.opt_num("--tol", "tol", "quadrature tolerance");
    }
    {
        Sub& s = add_sub("examples", "counterexample demonstrations", false);
        s.opt_str("--name", "name", "bessel, poisson, squared-bm, or quantile");
        s.opt_str("--t-schedule", "t_schedule", "maturity schedule");
        s.opt_num("--delta", "delta", "bessel dimension parameter");
        s.opt_num("--rate", "rate", "poisson jump rate");
        s.opt_num("--p", "p", "quantile level");
    }
    {
        Sub& s = add_sub("reproduce", "run every config in a directory and compare verdicts",
                         false);
        s.opt_str("--dir", "dir", "directory of run configs (default repro)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (auto& [name, sub] : subs) {
            if (!sub.cli->parsed()) continue;
            json cfg = sub.to_cfg("runs/" + name);
            return execute(name, std::move(cfg), sub.flags.out_dir);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
