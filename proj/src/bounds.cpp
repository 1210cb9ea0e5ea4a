#include "smalltime/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "smalltime/errors.hpp"
#include "smalltime/stats.hpp"

namespace smalltime::bounds {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

void require_c(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw BadInput("drift bound c must be finite and >= 0");
}

void csv_number(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
}

} // namespace

double horizon(double c) {
    require_c(c);
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * kLog2 / (c * c);
}

BoundPair bounds_at(double c, double t) {
    require_c(c);
    if (!(t >= 0.0) || !std::isfinite(t)) throw BadInput("t must be finite and >= 0");
    BoundPair b;
    if (c == 0.0 || t == 0.0) {
        b.s = 0.0;
        b.f1 = b.f2 = -kLog2;
        b.e_f1 = b.e_f2 = 0.5;
        b.expansion_lo = b.expansion_hi = 0.5;
        b.p_lower = 1.0;
        b.p_upper = std::numeric_limits<double>::infinity();
        b.in_horizon = true;
        return b;
    }
    const double s = c * std::sqrt(t / (2.0 * kLog2));
    b.s = s;
    b.in_horizon = s < 1.0;
    b.f1 = -kLog2 * (1.0 + s) * (1.0 + s);
    b.e_f1 = std::exp(b.f1);
    if (b.in_horizon) {
        b.f2 = -kLog2 * (1.0 - s) * (1.0 - s);
        b.e_f2 = std::exp(b.f2);
    } else {
        b.f2 = 0.0;
        b.e_f2 = 1.0;
    }
    b.expansion_lo = 0.5 - s * kLog2;
    b.expansion_hi = 0.5 + s * kLog2;
    b.p_lower = 1.0 + s;
    b.p_upper = 1.0 / s;
    return b;
}

BoundsCurve girsanov_bounds(double c, const std::vector<double>& t_grid) {
    require_c(c);
    if (t_grid.empty()) throw BadInput("girsanov_bounds: empty t grid");
    BoundsCurve curve;
    curve.c = c;
    curve.horizon = horizon(c);
    curve.t = t_grid;
    curve.rows.reserve(t_grid.size());
    for (double t : t_grid) curve.rows.push_back(bounds_at(c, t));
    return curve;
}

nlohmann::json BoundsCurve::to_json() const {
    nlohmann::json j;
    j["c"] = c;
    j["horizon"] = horizon;
    nlohmann::json rows_j = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BoundPair& b = rows[i];
        rows_j.push_back({{"t", t[i]},
                          {"f1", b.f1},
                          {"f2", b.f2},
                          {"e_f1", b.e_f1},
                          {"e_f2", b.e_f2},
                          {"expansion_lo", b.expansion_lo},
                          {"expansion_hi", b.expansion_hi},
                          {"p_lower", b.p_lower},
                          {"p_upper", b.p_upper},
                          {"in_horizon", b.in_horizon}});
    }
    j["rows"] = std::move(rows_j);
    return j;
}

void BoundsCurve::write_csv(std::ostream& out) const {
    out << "t,f1,f2,e_f1,e_f2,expansion_lo,expansion_hi,p_lower,p_upper,in_horizon\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const BoundPair& b = rows[i];
        csv_number(out, t[i]);
        out << ',';
        csv_number(out, b.f1);
        out << ',';
        csv_number(out, b.f2);
        out << ',';
        csv_number(out, b.e_f1);
        out << ',';
        csv_number(out, b.e_f2);
        out << ',';
        csv_number(out, b.expansion_lo);
        out << ',';
        csv_number(out, b.expansion_hi);
        out << ',';
        csv_number(out, b.p_lower);
        out << ',';
        csv_number(out, b.p_upper);
        out << ',' << (b.in_horizon ? "1" : "0") << '\n';
    }
}

std::vector<ExpansionError> expansion_error(double c, const std::vector<double>& t_grid) {
    require_c(c);
    std::vector<ExpansionError> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t > 0.0)) throw BadInput("expansion_error: t values must be positive");
        const BoundPair b = bounds_at(c, t);
        ExpansionError e;
        e.t = t;
        e.lower_ratio = std::fabs(b.e_f1 - b.expansion_lo) / t;
        e.upper_ratio = std::fabs(b.e_f2 - b.expansion_hi) / t;
        rows.push_back(e);
    }
    return rows;
}

double expansion_error_limit(double c) {
    require_c(c);
    return c * c * (kLog2 / 2.0 - 0.25);
}

double drift_bound_for_model(const models::ModelSpec& spec) {
    models::validate(spec);
    using models::Kind;
    switch (spec.kind) {
        case Kind::DriftedBM: {
            const double b = spec.param("b");
            const double sigma = spec.param("sigma");
            return std::fabs(b) * std::sqrt(static_cast<double>(spec.dim)) / sigma;
        }
        case Kind::GBM: {
            const double r = spec.param("r");
            const double sigma = spec.param("sigma");
            return std::fabs(r - 0.5 * sigma * sigma) / sigma;
        }
        case Kind::JumpDiffusion: {
            const double b = spec.param("b");
            const double sigma = spec.param("sigma");
            return std::fabs(b) / sigma;
        }
        default:
            throw OutOfScope("model '" + models::kind_name(spec.kind) +
                             "' has no finite drift-to-volatility bound");
    }
}

BracketReport verify_bracketing(const models::ModelSpec& model,
                                const std::vector<double>& t_grid,
                                const sim::SimConfig& config) {
    if (model.dim != 1) throw BadInput("verify_bracketing handles scalar models only");
    const double c = drift_bound_for_model(model);

    BracketReport rep;
    rep.c = c;
    rep.all_pass = true;

    // Drift of the observable's driving Gaussian part per unit volatility;
    // used for the closed forms below.
    using models::Kind;
    const bool has_exact = model.kind == Kind::DriftedBM || model.kind == Kind::GBM;
    double b_over_sigma = 0.0;
    if (model.kind == Kind::DriftedBM) {
        b_over_sigma = model.param("b") / model.param("sigma");
    } else if (model.kind == Kind::GBM) {
        const double sigma = model.param("sigma");
        b_over_sigma = (model.param("r") - 0.5 * sigma * sigma) / sigma;
    }
    const double level = model.observable_start()[0];

    for (double t : t_grid) {
        if (!(t > 0.0)) throw BadInput("verify_bracketing: t values must be positive");
        const BoundPair b = bounds_at(c, t);
        BracketRow row;
        row.t = t;
        row.lower = b.e_f1;
        row.upper = b.e_f2;
        if (has_exact) {
            row.exact = true;
            row.prob = stats::normal_cdf(b_over_sigma * std::sqrt(t));
            row.ci_low = row.ci_high = row.prob;
            row.pass = row.prob >= row.lower - 1e-12 && row.prob <= row.upper + 1e-12;
        } else {
            sim::SimConfig cfg = config;
            const sim::MCSample sample = sim::simulate_terminal(model, t, cfg);
            const stats::ProbEstimate est = sim::prob_exceed(sample, 0, level, 0.99);
            row.exact = false;
            row.prob = est.p_hat;
            row.ci_low = est.ci_low;
            row.ci_high = est.ci_high;
            row.pass = est.ci_high >= row.lower && est.ci_low <= row.upper;
        }
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json BracketReport::to_json() const {
    nlohmann::json j;
    j["c"] = c;
    j["all_pass"] = all_pass;
    nlohmann::json rows_j = nlohmann::json::array();
    for (const BracketRow& r : rows)
        rows_j.push_back({{"t", r.t},
                          {"prob", r.prob},
                          {"ci_low", r.ci_low},
                          {"ci_high", r.ci_high},
                          {"lower", r.lower},
                          {"upper", r.upper},
                          {"exact", r.exact},
                          {"pass", r.pass}});
    j["rows"] = std::move(rows_j);
    return j;
}

void BracketReport::write_csv(std::ostream& out) const {
    out << "t,prob,ci_low,ci_high,lower,upper,exact,pass\n";
    for (const BracketRow& r : rows) {
        csv_number(out, r.t);
        out << ',';
        csv_number(out, r.prob);
        out << ',';
        csv_number(out, r.ci_low);
        out << ',';
        csv_number(out, r.ci_high);
        out << ',';
        csv_number(out, r.lower);
        out << ',';
        csv_number(out, r.upper);
        out << ',' << (r.exact ? "1" : "0") << ',' << (r.pass ? "1" : "0") << '\n';
    }
}

} // namespace smalltime::bounds
