#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include <smalltime/bounds.hpp>
#include <smalltime/clt.hpp>
#include <smalltime/errors.hpp>
#include <smalltime/models.hpp>
#include <smalltime/pricing.hpp>
#include <smalltime/rng.hpp>
#include <smalltime/simulate.hpp>
#include <smalltime/skew.hpp>
#include <smalltime/stats.hpp>

namespace py = pybind11;
namespace st = smalltime;

namespace {

// ------------------------------------------------------------
// JSON bridging: reports cross the boundary as plain dicts and lists.
// ------------------------------------------------------------

nlohmann::json py_to_json(py::handle obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::dict>(obj)) {
        nlohmann::json j = nlohmann::json::object();
        for (auto item : obj.cast<py::dict>())
            j[item.first.cast<std::string>()] = py_to_json(item.second);
        return j;
    }
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        nlohmann::json j = nlohmann::json::array();
        for (auto item : obj.cast<py::sequence>()) j.push_back(py_to_json(item));
        return j;
    }
    throw py::type_error("unsupported value in model or config dictionary");
}

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer:
            return py::int_(j.get<long long>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

st::models::ModelSpec model_from(py::handle obj) {
    return st::models::ModelSpec::from_json(py_to_json(obj));
}

// "auto" resolves to the exact sampler whenever the model admits one; path
// sampling additionally excludes the squared Bessel start-only sampler.
st::sim::Scheme resolve_scheme(const std::string& name, const st::models::ModelSpec& model,
                               bool paths_mode) {
    if (name == "euler") return st::sim::Scheme::EulerMaruyama;
    if (name == "exact") return st::sim::Scheme::Exact;
    if (name == "auto") {
        const bool exact = st::pricing::exact_terminal_available(model) &&
                           !(paths_mode && model.kind == st::models::Kind::SquaredBessel);
        return exact ? st::sim::Scheme::Exact : st::sim::Scheme::EulerMaruyama;
    }
    throw st::BadInput("scheme must be auto, euler, or exact");
}

st::sim::SimConfig sim_config(const st::models::ModelSpec& model, std::size_t n_paths,
                              std::uint64_t seed, const std::string& scheme, double h_max,
                              int threads, bool paths_mode = false) {
    st::sim::SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.seed = seed;
    cfg.scheme = resolve_scheme(scheme, model, paths_mode);
    cfg.h_max = h_max;
    cfg.threads = threads;
    return cfg;
}

py::dict sample_to_py(const st::sim::MCSample& sample) {
    py::array_t<double> values({sample.n_paths, sample.n_cols});
    std::copy(sample.values.begin(), sample.values.end(), values.mutable_data());
    py::dict out;
    out["values"] = std::move(values);
    out["columns"] = sample.col_labels;
    out["meta"] = json_to_py(sample.meta);
    return out;
}

py::dict bound_pair_to_py(const st::bounds::BoundPair& b) {
    py::dict out;
    out["s"] = b.s;
    out["f1"] = b.f1;
    out["f2"] = b.f2;
    out["e_f1"] = b.e_f1;
    out["e_f2"] = b.e_f2;
    out["expansion_lo"] = b.expansion_lo;
    out["expansion_hi"] = b.expansion_hi;
    out["p_lower"] = b.p_lower;
    out["p_upper"] = b.p_upper;
    out["in_horizon"] = b.in_horizon;
    return out;
}

py::dict digital_to_py(const st::pricing::DigitalEstimate& est) {
    py::dict out;
    out["T"] = est.t;
    out["strike"] = est.k;
    out["discount"] = est.discount;
    out["prob"] = est.prob;
    out["prob_ci"] = py::make_tuple(est.prob_ci_low, est.prob_ci_high);
    out["price"] = est.price;
    out["price_ci"] = py::make_tuple(est.price_ci_low, est.price_ci_high);
    out["n_paths"] = est.n_paths;
    out["exact"] = est.exact;
    return out;
}

st::pricing::RateCurve rate_curve(py::object r, py::object rates, py::object times,
                                  const st::models::ModelSpec& model) {
    if (!rates.is_none()) {
        st::pricing::RateCurve rc;
        rc.rates = rates.cast<std::vector<double>>();
        if (!times.is_none()) rc.times = times.cast<std::vector<double>>();
        return rc;
    }
    if (!r.is_none()) return st::pricing::RateCurve::constant(r.cast<double>());
    return st::pricing::RateCurve::constant(model.param_or("r", 0.0));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Small-time distribution checks, probability envelopes, and digital "
              "pricing for diffusion and jump models";
    m.attr("__version__") = SMALLTIME_VERSION;

    py::register_exception<st::BadInput>(m, "BadInput", PyExc_ValueError);
    py::register_exception<st::UnsupportedModel>(m, "UnsupportedModel", PyExc_ValueError);
    py::register_exception<st::SchemeUnavailable>(m, "SchemeUnavailable", PyExc_ValueError);
    py::register_exception<st::MappingDomain>(m, "MappingDomain", PyExc_ValueError);
    py::register_exception<st::NoArbViolation>(m, "NoArbViolation", PyExc_ValueError);
    py::register_exception<st::OutOfScope>(m, "OutOfScope", PyExc_ValueError);
    py::register_exception<st::DegenerateLimit>(m, "DegenerateLimit", PyExc_RuntimeError);
    py::register_exception<st::StatisticalFailure>(m, "StatisticalFailure", PyExc_RuntimeError);

    // -------------------- models --------------------

    m.def(
        "canonical_model",
        [](py::dict model) {
            const auto spec = model_from(model);
            py::dict out;
            out["model"] = json_to_py(spec.to_json());
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(spec.identity_hash()));
            out["hash"] = std::string(buf);
            return out;
        },
        py::arg("model"),
        "Validate a model dictionary and return its canonical form and identity hash.");

    m.def(
        "check_assumptions",
        [](py::dict model, double horizon) {
            return json_to_py(st::models::check_assumptions(model_from(model), horizon).to_json());
        },
        py::arg("model"), py::arg("horizon") = 1.0,
        "Itemized admissibility report for the small-time limit theory.");

    // -------------------- simulation --------------------

    m.def(
        "simulate_terminal",
        [](py::dict model, double t, std::size_t n_paths, std::uint64_t seed,
           const std::string& scheme, double h_max, int threads) {
            const auto spec = model_from(model);
            const auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads);
            return sample_to_py(st::sim::simulate_terminal(spec, t, cfg));
        },
        py::arg("model"), py::arg("t"), py::arg("n_paths") = 10000, py::arg("seed") = 0,
        py::arg("scheme") = "auto", py::arg("h_max") = 0.0, py::arg("threads") = 0,
        "Monte Carlo sample of the observable state at time t; values has one "
        "row per path.");

    m.def(
        "simulate_paths",
        [](py::dict model, const std::vector<double>& t_grid, std::size_t n_paths,
           std::uint64_t seed, const std::string& scheme, double h_max, int threads) {
            const auto spec = model_from(model);
            auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads, true);
            cfg.t_grid = t_grid;
            return sample_to_py(st::sim::simulate_paths(spec, cfg));
        },
        py::arg("model"), py::arg("t_grid"), py::arg("n_paths") = 10000, py::arg("seed") = 0,
        py::arg("scheme") = "auto", py::arg("h_max") = 0.0, py::arg("threads") = 0,
        "Observable state along t_grid; columns follow the grid point by point.");

    // -------------------- distribution checks --------------------

    m.def(
        "clt_check",
        [](py::dict model, const std::string& mapping, std::vector<double> t_schedule,
           std::size_t n_paths, std::uint64_t seed, const std::string& scheme, double h_max,
           int threads, double level) {
            const auto spec = model_from(model);
            const auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads);
            const auto map = st::clt::mapping_from_name(mapping, spec.dim);
            return json_to_py(
                st::clt::clt_check(spec, map, std::move(t_schedule), cfg, level).to_json());
        },
        py::arg("model"), py::arg("mapping") = "identity",
        py::arg("t_schedule") = std::vector<double>{1e-2, 1e-4, 1e-6},
        py::arg("n_paths") = 10000, py::arg("seed") = 0, py::arg("scheme") = "auto",
        py::arg("h_max") = 0.0, py::arg("threads") = 0, py::arg("level") = 0.001,
        "Normality of normalized increments along a vanishing time schedule.");

    m.def(
        "fclt_check",
        [](py::dict model, const std::string& mapping, std::vector<double> u_schedule,
           std::vector<double> t_grid, std::size_t n_paths, std::uint64_t seed,
           const std::string& scheme, double h_max, int threads, double level) {
            const auto spec = model_from(model);
            const auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads, true);
            const auto map = st::clt::mapping_from_name(mapping, spec.dim);
            return json_to_py(st::clt::fclt_check(spec, map, std::move(u_schedule),
                                                  std::move(t_grid), cfg, level)
                                  .to_json());
        },
        py::arg("model"), py::arg("mapping") = "identity",
        py::arg("u_schedule") = std::vector<double>{1e-2, 1e-4},
        py::arg("t_grid") = std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0},
        py::arg("n_paths") = 10000, py::arg("seed") = 0, py::arg("scheme") = "auto",
        py::arg("h_max") = 0.0, py::arg("threads") = 0, py::arg("level") = 0.001,
        "Brownian behavior of rescaled paths on u * t_grid.");

    m.def(
        "ldp_rate",
        [](const std::function<double(double)>& sigma, double x0, double eps, double tol) {
            return st::clt::ldp_rate(sigma, x0, eps, tol);
        },
        py::arg("sigma"), py::arg("x0"), py::arg("eps"), py::arg("tol") = 1e-10,
        "Small-time decay rate of an up-crossing by eps for volatility sigma(x).");

    // -------------------- probability bounds --------------------

    m.def(
        "bounds_at", [](double c, double t) { return bound_pair_to_py(st::bounds::bounds_at(c, t)); },
        py::arg("c"), py::arg("t"),
        "Two-sided envelope for P(X_t > x0) given a drift-to-volatility bound c.");

    m.def(
        "girsanov_bounds",
        [](double c, const std::vector<double>& t_grid) {
            return json_to_py(st::bounds::girsanov_bounds(c, t_grid).to_json());
        },
        py::arg("c"), py::arg("t_grid"), "Envelope evaluated along a time grid.");

    m.def("expansion_error_limit", &st::bounds::expansion_error_limit, py::arg("c"),
          "Small-t limit of the expansion remainder ratio.");

    m.def(
        "drift_bound",
        [](py::dict model) { return st::bounds::drift_bound_for_model(model_from(model)); },
        py::arg("model"), "Drift-to-volatility bound c implied by the model parameters.");

    m.def(
        "verify_bracketing",
        [](py::dict model, const std::vector<double>& t_grid, std::size_t n_paths,
           std::uint64_t seed, const std::string& scheme, double h_max, int threads) {
            const auto spec = model_from(model);
            const auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads);
            return json_to_py(st::bounds::verify_bracketing(spec, t_grid, cfg).to_json());
        },
        py::arg("model"), py::arg("t_grid"), py::arg("n_paths") = 100000, py::arg("seed") = 0,
        py::arg("scheme") = "auto", py::arg("h_max") = 0.0, py::arg("threads") = 0,
        "Check the model's exceedance probability against the envelope.");

    // -------------------- pricing --------------------

    m.def("bs_call", &st::pricing::bs_call, py::arg("s0"), py::arg("k"), py::arg("r"),
          py::arg("t"), py::arg("sigma"));
    m.def("bs_digital", &st::pricing::bs_digital, py::arg("s0"), py::arg("k"), py::arg("r"),
          py::arg("t"), py::arg("sigma"));

    m.def(
        "implied_vol",
        [](double price, double s0, double k, double r, double t) {
            const auto q = st::pricing::implied_vol(price, s0, k, r, t);
            py::dict out;
            out["sigma"] = q.sigma;
            out["residual"] = q.residual;
            out["iterations"] = q.iterations;
            return out;
        },
        py::arg("price"), py::arg("s0"), py::arg("k"), py::arg("r"), py::arg("t"),
        "Black-Scholes volatility reproducing the call price.");

    m.def(
        "mc_digital",
        [](py::dict model, double k, double t, py::object r, py::object rates,
           py::object times, std::size_t n_paths, std::uint64_t seed, double h_max,
           int threads, double confidence) {
            const auto spec = model_from(model);
            st::sim::SimConfig cfg;
            cfg.n_paths = n_paths;
            cfg.seed = seed;
            cfg.h_max = h_max;
            cfg.threads = threads;
            const auto rc = rate_curve(r, rates, times, spec);
            return digital_to_py(st::pricing::mc_digital(spec, k, t, rc, cfg, confidence));
        },
        py::arg("model"), py::arg("k"), py::arg("t"), py::arg("r") = py::none(),
        py::arg("rates") = py::none(), py::arg("times") = py::none(),
        py::arg("n_paths") = 100000, py::arg("seed") = 0, py::arg("h_max") = 0.0,
        py::arg("threads") = 0, py::arg("confidence") = 0.99,
        "Digital call price with Wilson confidence intervals on the exceedance "
        "probability; the sampler is exact whenever the model admits one.");

    m.def(
        "atm_digital_check",
        [](py::dict model, std::vector<double> t_schedule, std::size_t n_paths,
           std::uint64_t seed, const std::string& scheme, double h_max, int threads,
           double confidence, bool strict) {
            const auto spec = model_from(model);
            const auto cfg = sim_config(spec, n_paths, seed, scheme, h_max, threads);
            return json_to_py(st::pricing::atm_digital_limit_check(spec, t_schedule, cfg,
                                                                   confidence, strict)
                                  .to_json());
        },
        py::arg("model"), py::arg("t_schedule") = std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4},
        py::arg("n_paths") = 100000, py::arg("seed") = 0, py::arg("scheme") = "auto",
        py::arg("h_max") = 0.0, py::arg("threads") = 0, py::arg("confidence") = 0.99,
        py::arg("strict") = false,
        "At-the-money digital probability along a vanishing maturity schedule.");

    // -------------------- implied vol skew --------------------

    m.def(
        "skew_check",
        [](py::dict model, std::vector<double> t_schedule, bool analytic, double width_tol,
           std::size_t n_paths, std::uint64_t seed, double h_max, int threads) {
            const auto spec = model_from(model);
            st::sim::SimConfig base;
            base.n_paths = n_paths;
            base.seed = seed;
            base.h_max = h_max;
            base.threads = threads;
            std::vector<st::skew::SkewReport> reports;
            nlohmann::json j;
            j["reports"] = nlohmann::json::array();
            for (std::size_t i = 0; i < t_schedule.size(); ++i) {
                st::sim::SimConfig cfg = base;
                cfg.seed = st::rng::derive_seed(base.seed, i);
                reports.push_back(st::skew::compare_bounds(spec, t_schedule[i], cfg, analytic));
                j["reports"].push_back(reports.back().to_json());
            }
            const bool have_clt =
                !reports.empty() &&
                reports.front().in_clt != st::skew::BandVerdict::NotApplicable;
            if (reports.size() >= 2 && have_clt) {
                const auto chk = st::skew::width_ratio_check(reports, width_tol);
                j["width_ratio_check"] = {{"reference", chk.reference},
                                          {"max_rel_dev", chk.max_rel_dev},
                                          {"pass", chk.pass}};
            }
            return json_to_py(j);
        },
        py::arg("model"), py::arg("t_schedule"), py::arg("analytic") = false,
        py::arg("width_tol") = 0.10, py::arg("n_paths") = 200000, py::arg("seed") = 0,
        py::arg("h_max") = 0.0, py::arg("threads") = 0,
        "At-the-money slope against the model-implied and model-free bands per "
        "maturity, plus the width ratio scaling check.");

    // -------------------- statistics --------------------

    m.def("normal_cdf", &st::stats::normal_cdf, py::arg("x"));
    m.def("normal_quantile", &st::stats::normal_quantile, py::arg("p"));
    m.def(
        "wilson_interval",
        [](std::size_t successes, std::size_t n, double confidence) {
            const auto est = st::stats::wilson_interval(successes, n, confidence);
            return py::make_tuple(est.ci_low, est.ci_high);
        },
        py::arg("successes"), py::arg("n"), py::arg("confidence") = 0.99);
}
