#include "smalltime/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "smalltime/stats.hpp"

namespace smalltime::models {

namespace {

const std::map<std::string, Kind>& name_table() {
    static const std::map<std::string, Kind> table = {
        {"DriftedBM", Kind::DriftedBM},
        {"GBM", Kind::GBM},
        {"CEV", Kind::CEV},
        {"Heston", Kind::Heston},
        {"SquaredBessel", Kind::SquaredBessel},
        {"SquaredBM", Kind::SquaredBM},
        {"QuantileDriftBM", Kind::QuantileDriftBM},
        {"PoissonMartingale", Kind::PoissonMartingale},
        {"JumpDiffusion", Kind::JumpDiffusion},
    };
    return table;
}

struct ParamRule {
    std::set<std::string> required;
    std::set<std::string> optional;
};

const ParamRule& param_rule(Kind kind) {
    static const std::map<Kind, ParamRule> rules = {
        {Kind::DriftedBM, {{"b", "sigma"}, {}}},
        {Kind::GBM, {{"sigma", "r"}, {"log"}}},
        {Kind::CEV, {{"sigma", "beta"}, {"r"}}},
        {Kind::Heston, {{"v0", "kappa", "theta", "xi", "rho", "r"}, {"log"}}},
        {Kind::SquaredBessel, {{"delta"}, {}}},
        {Kind::SquaredBM, {{}, {}}},
        {Kind::QuantileDriftBM, {{"p"}, {}}},
        {Kind::PoissonMartingale, {{"rate"}, {}}},
        {Kind::JumpDiffusion, {{"b", "sigma", "intensity", "jump_size"}, {"jump_uniform"}}},
    };
    return rules.at(kind);
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw BadInput("model validation: " + msg);
}

} // namespace

std::string kind_name(Kind kind) {
    for (const auto& [name, k] : name_table())
        if (k == kind) return name;
    throw UnsupportedModel("unknown model kind");
}

Kind kind_from_name(const std::string& name) {
    const auto it = name_table().find(name);
    if (it == name_table().end()) throw UnsupportedModel("unknown model kind: " + name);
    return it->second;
}

double JumpSpec::sample(rng::Xoshiro256pp& gen) const {
    const double u = rng::uniform01(gen);
    if (law == JumpLaw::TwoPoint) return u < 0.5 ? -magnitude : magnitude;
    return (2.0 * u - 1.0) * magnitude;
}

double ModelSpec::param(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) throw BadInput("missing model parameter: " + name);
    return it->second;
}

double ModelSpec::param_or(const std::string& name, double fallback) const {
    const auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

bool ModelSpec::log_coords() const {
    return param_or("log", 0.0) != 0.0;
}

std::vector<double> ModelSpec::observable_start() const {
    std::vector<double> start = x0;
    if ((kind == Kind::GBM || kind == Kind::Heston) && log_coords())
        for (auto& v : start) v = std::log(v);
    return start;
}

std::optional<JumpSpec> ModelSpec::jumps() const {
    if (kind != Kind::JumpDiffusion) return std::nullopt;
    JumpSpec js;
    js.intensity = param("intensity");
    js.magnitude = param("jump_size");
    js.law = param_or("jump_uniform", 0.0) != 0.0 ? JumpLaw::CenteredUniform : JumpLaw::TwoPoint;
    return js;
}

nlohmann::json ModelSpec::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_name(kind);
    j["params"] = nlohmann::json::object();
    for (const auto& [k, v] : params) j["params"][k] = v;
    j["x0"] = x0;
    j["dim"] = dim;
    return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw BadInput("model JSON must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "kind" && key != "params" && key != "x0" && key != "dim")
            throw BadInput("model JSON: unknown key '" + key + "'");
    }
    if (!j.contains("kind") || !j["kind"].is_string())
        throw BadInput("model JSON: 'kind' string is required");
    if (!j.contains("params") || !j["params"].is_object())
        throw BadInput("model JSON: 'params' object is required");
    if (!j.contains("x0") || !j["x0"].is_array())
        throw BadInput("model JSON: 'x0' array is required");

    ModelSpec spec;
    spec.kind = kind_from_name(j["kind"].get<std::string>());
    for (const auto& [key, value] : j["params"].items()) {
        if (!value.is_number()) throw BadInput("model JSON: parameter '" + key + "' must be a number");
        spec.params[key] = value.get<double>();
    }
    for (const auto& v : j["x0"]) {
        if (!v.is_number()) throw BadInput("model JSON: x0 entries must be numbers");
        spec.x0.push_back(v.get<double>());
    }
    spec.dim = j.contains("dim") ? j["dim"].get<std::size_t>() : spec.x0.size();
    validate(spec);
    return spec;
}

std::uint64_t ModelSpec::identity_hash() const {
    const std::string repr = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const unsigned char c : repr) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void validate(const ModelSpec& spec) {
    const ParamRule& rule = param_rule(spec.kind);
    for (const auto& name : rule.required)
        require(spec.params.count(name) == 1, kind_name(spec.kind) + " requires parameter '" + name + "'");
    for (const auto& [name, value] : spec.params) {
        require(rule.required.count(name) + rule.optional.count(name) == 1,
                kind_name(spec.kind) + " does not take parameter '" + name + "'");
        require(std::isfinite(value), "parameter '" + name + "' must be finite");
    }

    require(spec.dim >= 1, "dim must be at least 1");
    require(spec.x0.size() == spec.dim, "x0 length must equal dim");
    if (spec.kind != Kind::DriftedBM)
        require(spec.dim == 1, kind_name(spec.kind) + " is one-dimensional");
    for (const double v : spec.x0) require(std::isfinite(v), "x0 must be finite");

    switch (spec.kind) {
        case Kind::DriftedBM:
            require(spec.param("sigma") > 0.0, "sigma must be positive");
            break;
        case Kind::GBM:
            require(spec.param("sigma") > 0.0, "sigma must be positive");
            require(spec.x0[0] > 0.0, "GBM needs a positive start");
            break;
        case Kind::CEV: {
            require(spec.param("sigma") > 0.0, "sigma must be positive");
            const double beta = spec.param("beta");
            require(beta > 0.0 && beta <= 1.0, "beta must lie in (0,1]");
            require(spec.x0[0] >= 0.0, "CEV start must be nonnegative");
            break;
        }
        case Kind::Heston: {
            require(spec.param("v0") >= 0.0, "v0 must be nonnegative");
            require(spec.param("theta") >= 0.0, "theta must be nonnegative");
            require(spec.param("kappa") >= 0.0, "kappa must be nonnegative");
            require(spec.param("xi") >= 0.0, "xi must be nonnegative");
            const double rho = spec.param("rho");
            require(rho >= -1.0 && rho <= 1.0, "rho must lie in [-1,1]");
            require(spec.x0[0] > 0.0, "Heston needs a positive start");
            break;
        }
        case Kind::SquaredBessel:
            require(spec.param("delta") >= 0.0, "delta must be nonnegative");
            require(spec.x0[0] >= 0.0, "squared Bessel start must be nonnegative");
            break;
        case Kind::SquaredBM:
            require(spec.x0[0] == 0.0, "SquaredBM starts at 0");
            break;
        case Kind::QuantileDriftBM: {
            const double p = spec.param("p");
            require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
            break;
        }
        case Kind::PoissonMartingale:
            require(spec.param("rate") > 0.0, "rate must be positive");
            break;
        case Kind::JumpDiffusion: {
            require(spec.param("sigma") > 0.0, "sigma must be positive");
            require(spec.param("intensity") >= 0.0, "intensity must be nonnegative");
            require(spec.param("jump_size") > 0.0, "jump_size must be positive");
            const double u = spec.param_or("jump_uniform", 0.0);
            require(u == 0.0 || u == 1.0, "jump_uniform must be 0 or 1");
            break;
        }
    }

    if (spec.params.count("log")) {
        const double lg = spec.params.at("log");
        require(lg == 0.0 || lg == 1.0, "log flag must be 0 or 1");
    }
}

ModelSpec make_model(Kind kind, std::map<std::string, double> params,
                     std::vector<double> x0, std::size_t dim) {
    ModelSpec spec;
    spec.kind = kind;
    spec.params = std::move(params);
    spec.x0 = std::move(x0);
    spec.dim = dim;
    validate(spec);
    return spec;
}

// ============================================================
// Coefficients and the small-time diffusion matrix
// ============================================================

CoefficientView coefficients(const ModelSpec& spec) {
    CoefficientView view;
    view.dim = spec.dim;
    view.jumps = spec.jumps();
    const std::size_t m = spec.dim;

    switch (spec.kind) {
        case Kind::DriftedBM: {
            const double b = spec.param("b"), sigma = spec.param("sigma");
            view.drift = [b, m](double, const std::vector<double>&) {
                return std::vector<double>(m, b);
            };
            view.diffusion = [sigma, m](double, const std::vector<double>&) {
                la::Matrix d = la::Matrix::identity(m);
                for (std::size_t i = 0; i < m; ++i) d(i, i) = sigma;
                return d;
            };
            break;
        }
        case Kind::GBM: {
            const double sigma = spec.param("sigma"), r = spec.param("r");
            if (spec.log_coords()) {
                const double b = r - 0.5 * sigma * sigma;
                view.drift = [b](double, const std::vector<double>&) { return std::vector<double>{b}; };
                view.diffusion = [sigma](double, const std::vector<double>&) {
                    la::Matrix d(1, 1);
                    d(0, 0) = sigma;
                    return d;
                };
            } else {
                view.drift = [r](double, const std::vector<double>& x) {
                    return std::vector<double>{r * x[0]};
                };
                view.diffusion = [sigma](double, const std::vector<double>& x) {
                    la::Matrix d(1, 1);
                    d(0, 0) = sigma * x[0];
                    return d;
                };
            }
            break;
        }
        case Kind::CEV: {
            const double sigma = spec.param("sigma"), beta = spec.param("beta");
            const double r = spec.param_or("r", 0.0);
            view.drift = [r](double, const std::vector<double>& x) {
                return std::vector<double>{r * x[0]};
            };
            view.diffusion = [sigma, beta](double, const std::vector<double>& x) {
                la::Matrix d(1, 1);
                d(0, 0) = sigma * std::pow(std::max(x[0], 0.0), beta);
                return d;
            };
            break;
        }
        case Kind::Heston: {
            // The latent variance is pinned to v0 by continuity; the view is
            // exact at (0, x0) only, which is all the checks evaluate.
            const double v0 = spec.param("v0"), r = spec.param("r");
            const bool lg = spec.log_coords();
            view.drift = [r, v0, lg](double, const std::vector<double>& x) {
                return std::vector<double>{lg ? r - 0.5 * v0 : r * x[0]};
            };
            view.diffusion = [v0, lg](double, const std::vector<double>& x) {
                la::Matrix d(1, 1);
                d(0, 0) = lg ? std::sqrt(v0) : std::sqrt(v0) * x[0];
                return d;
            };
            break;
        }
        case Kind::SquaredBessel: {
            const double delta = spec.param("delta");
            view.drift = [delta](double, const std::vector<double>&) {
                return std::vector<double>{delta};
            };
            view.diffusion = [](double, const std::vector<double>& x) {
                la::Matrix d(1, 1);
                d(0, 0) = 2.0 * std::sqrt(std::max(x[0], 0.0));
                return d;
            };
            break;
        }
        case Kind::SquaredBM: {
            view.drift = [](double, const std::vector<double>&) { return std::vector<double>{1.0}; };
            view.diffusion = [](double, const std::vector<double>& x) {
                la::Matrix d(1, 1);
                d(0, 0) = 2.0 * std::sqrt(std::max(x[0], 0.0));
                return d;
            };
            break;
        }
        case Kind::QuantileDriftBM: {
            const double q = stats::normal_quantile(spec.param("p"));
            view.drift = [q](double t, const std::vector<double>&) {
                if (q == 0.0) return std::vector<double>{0.0};
                if (t <= 0.0)
                    return std::vector<double>{q > 0.0
                                                   ? std::numeric_limits<double>::infinity()
                                                   : -std::numeric_limits<double>::infinity()};
                return std::vector<double>{q / (2.0 * std::sqrt(t))};
            };
            view.diffusion = [](double, const std::vector<double>&) {
                la::Matrix d(1, 1);
                d(0, 0) = 1.0;
                return d;
            };
            break;
        }
        case Kind::PoissonMartingale: {
            // Unit down-jumps live in the kind itself (JumpSpec is symmetric
            // by design and cannot express them); the view reports the
            // continuous part: compensator drift, no diffusion.
            view.drift = [](double, const std::vector<double>&) { return std::vector<double>{1.0}; };
            view.diffusion = [](double, const std::vector<double>&) { return la::Matrix(1, 1); };
            break;
        }
        case Kind::JumpDiffusion: {
            const double b = spec.param("b"), sigma = spec.param("sigma");
            view.drift = [b](double, const std::vector<double>&) { return std::vector<double>{b}; };
            view.diffusion = [sigma](double, const std::vector<double>&) {
                la::Matrix d(1, 1);
                d(0, 0) = sigma;
                return d;
            };
            break;
        }
    }
    return view;
}

la::Matrix small_time_matrix(const ModelSpec& spec) {
    if (spec.kind == Kind::PoissonMartingale)
        throw UnsupportedModel("PoissonMartingale has no diffusion part");
    const CoefficientView view = coefficients(spec);
    return view.diffusion(0.0, spec.observable_start());
}

// ============================================================
// Assumption checks
// ============================================================

std::string admissibility_name(Admissibility a) {
    switch (a) {
        case Admissibility::Holds: return "holds";
        case Admissibility::HoldsLocally: return "holds-locally";
        case Admissibility::Violated: return "violated";
        case Admissibility::NotCheckable: return "not-checkable";
    }
    return "not-checkable";
}

nlohmann::json AdmissibilityReport::to_json() const {
    nlohmann::json j;
    j["kind"] = kind_name(kind);
    j["horizon"] = horizon;
    j["limit_degenerate"] = limit_degenerate;
    j["overall"] = admissibility_name(overall);
    j["items"] = nlohmann::json::array();
    for (const auto& item : items) {
        j["items"].push_back({{"item", item.item},
                              {"status", admissibility_name(item.status)},
                              {"note", item.note}});
    }
    return j;
}

namespace {

int severity(Admissibility a) {
    switch (a) {
        case Admissibility::Holds: return 0;
        case Admissibility::HoldsLocally: return 1;
        case Admissibility::NotCheckable: return 2;
        case Admissibility::Violated: return 3;
    }
    return 2;
}

} // namespace

AdmissibilityReport check_assumptions(const ModelSpec& spec, double horizon) {
    AdmissibilityReport rep;
    rep.kind = spec.kind;
    rep.horizon = horizon;
    auto add = [&rep](std::string item, Admissibility status, std::string note) {
        rep.items.push_back({std::move(item), status, std::move(note)});
    };

    add("initial-value", Admissibility::Holds, "deterministic start");
    add("drift-density", Admissibility::Holds,
        "finite-variation part has an integrable density on [0, horizon]");

    const bool jump_kind =
        spec.kind == Kind::PoissonMartingale || spec.kind == Kind::JumpDiffusion;

    switch (spec.kind) {
        case Kind::DriftedBM:
        case Kind::JumpDiffusion:
            add("drift-bounded", Admissibility::Holds, "constant drift");
            add("covariation-density", Admissibility::Holds, "constant diffusion");
            add("diffusion-bounded", Admissibility::Holds, "constant diffusion");
            add("diffusion-limit", Admissibility::Holds, "constant diffusion equals its limit");
            break;
        case Kind::GBM:
            if (spec.log_coords()) {
                add("drift-bounded", Admissibility::Holds, "constant drift r - sigma^2/2");
                add("covariation-density", Admissibility::Holds, "constant diffusion");
                add("diffusion-bounded", Admissibility::Holds, "constant diffusion");
                add("diffusion-limit", Admissibility::Holds, "constant diffusion equals its limit");
            } else {
                add("drift-bounded", Admissibility::HoldsLocally,
                    "drift r*S is bounded on compacts, localize before the exit time");
                add("covariation-density", Admissibility::Holds, "continuous coefficient");
                add("diffusion-bounded", Admissibility::HoldsLocally, "sigma*S bounded on compacts");
                add("diffusion-limit", Admissibility::Holds, "sigma_t -> sigma*S0 by path continuity");
            }
            break;
        case Kind::CEV:
            add("drift-bounded", Admissibility::HoldsLocally, "drift r*S bounded on compacts");
            add("covariation-density", Admissibility::Holds, "continuous coefficient");
            add("diffusion-bounded", Admissibility::HoldsLocally,
                "sigma*max(S,0)^beta bounded on compacts");
            add("diffusion-limit", Admissibility::Holds, "continuous coefficient at the start");
            break;
        case Kind::Heston: {
            add("drift-bounded", Admissibility::HoldsLocally, "drift bounded on compacts");
            add("covariation-density", Admissibility::Holds, "variance process is continuous");
            add("diffusion-bounded", Admissibility::HoldsLocally,
                "sqrt(v_t) is continuous, bounded on compact time windows");
            add("diffusion-limit", Admissibility::Holds, "sqrt(v_t) -> sqrt(v0) a.s.");
            const double feller = 2.0 * spec.param("kappa") * spec.param("theta");
            const double xi2 = spec.param("xi") * spec.param("xi");
            add("feller-condition",
                feller >= xi2 ? Admissibility::Holds : Admissibility::NotCheckable,
                feller >= xi2 ? "2*kappa*theta >= xi^2, variance stays positive"
                              : "informational only: variance can touch zero, "
                                "the truncation scheme absorbs it");
            break;
        }
        case Kind::SquaredBessel:
            add("drift-bounded", Admissibility::Holds, "constant drift delta");
            add("covariation-density", Admissibility::Holds, "continuous coefficient");
            add("diffusion-bounded", Admissibility::HoldsLocally, "2*sqrt(R) bounded on compacts");
            add("diffusion-limit", Admissibility::Holds, "limit 2*sqrt(x0), degenerate at 0");
            break;
        case Kind::SquaredBM:
            add("drift-bounded", Admissibility::Holds, "constant drift 1");
            add("covariation-density", Admissibility::Holds, "continuous coefficient");
            add("diffusion-bounded", Admissibility::HoldsLocally, "2*sqrt(X) bounded on compacts");
            add("diffusion-limit", Admissibility::Holds, "limit 0, degenerate");
            break;
        case Kind::QuantileDriftBM: {
            const double p = spec.param("p");
            if (p == 0.5) {
                add("drift-bounded", Admissibility::Holds, "p = 1/2 makes the drift vanish");
            } else {
                add("drift-bounded", Admissibility::Violated,
                    "drift density behaves like 1/(2 sqrt(t)) near 0 and admits no bound");
            }
            add("covariation-density", Admissibility::Holds, "unit diffusion");
            add("diffusion-bounded", Admissibility::Holds, "unit diffusion");
            add("diffusion-limit", Admissibility::Holds, "unit diffusion equals its limit");
            break;
        }
        case Kind::PoissonMartingale:
            add("drift-bounded", Admissibility::Holds, "compensator drift 1");
            add("covariation-density", Admissibility::Holds, "continuous part vanishes");
            add("diffusion-bounded", Admissibility::Holds, "no diffusion part");
            add("diffusion-limit", Admissibility::Holds, "limit 0, degenerate");
            break;
    }

    if (jump_kind) {
        add("jump-activity", Admissibility::Holds, "finite activity compound Poisson");
        add("jump-compensator-small", Admissibility::Holds,
            "finite activity makes the small-jump compensated term O(t), hence o(sqrt(t))");
        if (spec.kind == Kind::JumpDiffusion) {
            add("jump-symmetry", Admissibility::Holds, "jump law symmetric by construction");
        } else {
            add("jump-symmetry", Admissibility::Violated,
                "unit down-jumps only; the probability bracket does not transfer");
        }
    }

    // Degenerate limits are admissible, the CLT just collapses; record it.
    switch (spec.kind) {
        case Kind::SquaredBM:
        case Kind::PoissonMartingale:
            rep.limit_degenerate = true;
            break;
        case Kind::SquaredBessel:
        case Kind::CEV:
            rep.limit_degenerate = spec.x0[0] == 0.0;
            break;
        case Kind::Heston:
            rep.limit_degenerate = spec.param("v0") == 0.0;
            break;
        default:
            rep.limit_degenerate = false;
            break;
    }

    rep.overall = Admissibility::Holds;
    for (const auto& item : rep.items) {
        if (item.item == "feller-condition") continue;  // informational
        if (severity(item.status) > severity(rep.overall)) rep.overall = item.status;
    }
    return rep;
}

} // namespace smalltime::models
