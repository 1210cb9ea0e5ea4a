#include "smalltime/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smalltime/errors.hpp"
#include "smalltime/rng.hpp"
#include "smalltime/stats.hpp"

namespace smalltime::pricing {

namespace {

void csv_number(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
}

void require_market(double s0, double k, double r, double t, double sigma) {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw BadInput("spot must be positive");
    if (!(k > 0.0) || !std::isfinite(k)) throw BadInput("strike must be positive");
    if (!std::isfinite(r)) throw BadInput("rate must be finite");
    if (!(t >= 0.0) || !std::isfinite(t)) throw BadInput("maturity must be finite and >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw BadInput("volatility must be >= 0");
}

} // namespace

bool exact_terminal_available(const models::ModelSpec& spec) {
    using models::Kind;
    switch (spec.kind) {
        case Kind::DriftedBM:
        case Kind::GBM:
        case Kind::QuantileDriftBM:
        case Kind::SquaredBM:
        case Kind::PoissonMartingale:
            return true;
        case Kind::SquaredBessel:
            return spec.x0[0] == 0.0;
        default:
            return false;
    }
}

void RateCurve::validate() const {
    if (rates.empty()) throw BadInput("rate curve needs at least one rate");
    if (rates.size() != times.size() + 1)
        throw BadInput("rate curve needs one more rate than breakpoints");
    double prev = 0.0;
    for (double b : times) {
        if (!(b > prev) || !std::isfinite(b))
            throw BadInput("rate curve breakpoints must be positive and increasing");
        prev = b;
    }
    for (double r : rates)
        if (!std::isfinite(r)) throw BadInput("rate curve rates must be finite");
}

double RateCurve::rate_at(double t) const {
    validate();
    if (!(t >= 0.0)) throw BadInput("rate_at: t must be >= 0");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (t < times[i]) return rates[i];
    return rates.back();
}

double RateCurve::integral(double t) const {
    validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw BadInput("integral: t must be finite and >= 0");
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < times.size() && prev < t; ++i) {
        const double end = std::min(times[i], t);
        if (end > prev) acc += rates[i] * (end - prev);
        prev = std::max(prev, end);
    }
    if (t > prev) acc += rates.back() * (t - prev);
    return acc;
}

double RateCurve::discount(double t) const { return std::exp(-integral(t)); }

double bs_call(double s0, double k, double r, double t, double sigma) {
    require_market(s0, k, r, t, sigma);
    if (t == 0.0) return std::max(s0 - k, 0.0);
    const double df = std::exp(-r * t);
    if (sigma == 0.0) return std::max(s0 - k * df, 0.0);
    const double srt = sigma * std::sqrt(t);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * t) / srt;
    const double d2 = d1 - srt;
    return s0 * stats::normal_cdf(d1) - k * df * stats::normal_cdf(d2);
}

double bs_vega(double s0, double k, double r, double t, double sigma) {
    require_market(s0, k, r, t, sigma);
    if (t == 0.0 || sigma == 0.0) return 0.0;
    const double srt = sigma * std::sqrt(t);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma * sigma) * t) / srt;
    return s0 * stats::normal_pdf(d1) * std::sqrt(t);
}

double bs_digital(double s0, double k, double r, double t, double sigma) {
    require_market(s0, k, r, t, sigma);
    if (t == 0.0) return s0 > k ? 1.0 : 0.0;
    const double df = std::exp(-r * t);
    if (sigma == 0.0) return s0 * std::exp(r * t) > k ? df : 0.0;
    const double srt = sigma * std::sqrt(t);
    const double d2 = (std::log(s0 / k) + (r - 0.5 * sigma * sigma) * t) / srt;
    return df * stats::normal_cdf(d2);
}

VolQuote implied_vol(double call_price, double s0, double k, double r, double t) {
    require_market(s0, k, r, t, 1.0);
    if (!(t > 0.0)) throw BadInput("implied_vol: maturity must be positive");
    if (!std::isfinite(call_price)) throw BadInput("implied_vol: price must be finite");
    const double intrinsic = std::max(s0 - k * std::exp(-r * t), 0.0);
    if (!(call_price > intrinsic) || !(call_price < s0))
        throw NoArbViolation("call price outside the arbitrage band");

    VolQuote q;
    q.k = k;
    q.t = t;
    double lo = 1e-6, hi = 10.0;
    const auto excess = [&](double sigma) { return bs_call(s0, k, r, t, sigma) - call_price; };
    if (excess(hi) < 0.0) throw BadInput("implied volatility above the search ceiling of 10");
    if (excess(lo) > 0.0) {
        // Price barely above intrinsic; everything below the floor maps there.
        q.sigma = lo;
        q.residual = std::fabs(excess(lo));
        return q;
    }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
        ++q.iterations;
    }
    double sigma = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double v = bs_vega(s0, k, r, t, sigma);
        if (!(v > 0.0)) break;
        const double step = excess(sigma) / v;
        const double next = sigma - step;
        if (!(next > 0.0) || !std::isfinite(next)) break;
        sigma = next;
        ++q.iterations;
        if (std::fabs(step) < 1e-16 * std::max(1.0, sigma)) break;
    }
    q.sigma = sigma;
    q.residual = std::fabs(excess(sigma));
    return q;
}

DigitalEstimate mc_digital(const models::ModelSpec& model, double k, double t,
                           const RateCurve& rc, const sim::SimConfig& config,
                           double confidence) {
    models::validate(model);
    rc.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("mc_digital: maturity must be positive");
    if (!std::isfinite(k)) throw BadInput("mc_digital: strike must be finite");
    if (model.dim != 1) throw BadInput("mc_digital handles scalar models only");

    // A non-constant curve is folded into an equivalent constant rate. That is
    // exact when the rate enters the terminal log additively (GBM, Heston) and
    // rejected where it would silently change the law.
    models::ModelSpec spec = model;
    const bool has_rate = model.params.count("r") > 0;
    if (has_rate) {
        if (!rc.is_constant() && model.kind == models::Kind::CEV)
            throw BadInput("piecewise rates are not supported for this model");
        spec.params["r"] = rc.integral(t) / t;
    }

    sim::SimConfig cfg = config;
    const bool exact = exact_terminal_available(spec);
    cfg.scheme = exact ? sim::Scheme::Exact : sim::Scheme::EulerMaruyama;

    const sim::MCSample sample = sim::simulate_terminal(spec, t, cfg);
    const stats::ProbEstimate est = sim::prob_exceed(sample, 0, k, confidence);

    DigitalEstimate out;
    out.t = t;
    out.k = k;
    out.discount = rc.discount(t);
    out.prob = est.p_hat;
    out.prob_ci_low = est.ci_low;
    out.prob_ci_high = est.ci_high;
    out.price = out.discount * est.p_hat;
    out.price_ci_low = out.discount * est.ci_low;
    out.price_ci_high = out.discount * est.ci_high;
    out.n_paths = est.n;
    out.exact = exact;
    return out;
}

std::string limit_verdict_name(LimitVerdict v) {
    switch (v) {
        case LimitVerdict::Pass: return "pass";
        case LimitVerdict::Fail: return "fail";
        case LimitVerdict::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

AtmDigitalReport atm_digital_limit_check(const models::ModelSpec& model,
                                         const std::vector<double>& t_schedule,
                                         const sim::SimConfig& config,
                                         double confidence, bool strict) {
    models::validate(model);
    if (model.dim != 1) throw BadInput("atm_digital_limit_check handles scalar models only");
    if (t_schedule.empty()) throw BadInput("atm_digital_limit_check: empty schedule");
    for (double t : t_schedule)
        if (!(t > 0.0) || !std::isfinite(t))
            throw BadInput("atm_digital_limit_check: maturities must be positive");

    const models::AdmissibilityReport adm = models::check_assumptions(model);
    if (adm.limit_degenerate && strict)
        throw DegenerateLimit("small-time limit collapses for " +
                              models::kind_name(model.kind) + " at this start point");

    const RateCurve rc = RateCurve::constant(model.param_or("r", 0.0));
    const bool moving_level =
        model.kind == models::Kind::SquaredBessel && model.x0[0] == 0.0;
    const double x_start = model.observable_start()[0];

    AtmDigitalReport rep;
    for (std::size_t i = 0; i < t_schedule.size(); ++i) {
        const double t = t_schedule[i];
        AtmDigitalRow row;
        row.t = t;
        row.level = moving_level ? model.param("delta") * t : x_start;
        sim::SimConfig cfg = config;
        cfg.seed = rng::derive_seed(config.seed, i);
        row.est = mc_digital(model, row.level, t, rc, cfg, confidence);
        row.ci_contains_half =
            row.est.prob_ci_low <= 0.5 && 0.5 <= row.est.prob_ci_high;
        rep.rows.push_back(std::move(row));
    }

    const std::size_t idx_small = static_cast<std::size_t>(
        std::min_element(t_schedule.begin(), t_schedule.end()) - t_schedule.begin());
    if (adm.limit_degenerate) {
        rep.verdict = LimitVerdict::NotApplicable;
        rep.note = "limit is degenerate; rows report the raw trend";
    } else if (rep.rows[idx_small].ci_contains_half) {
        rep.verdict = LimitVerdict::Pass;
        rep.note = "confidence interval at the smallest maturity contains 1/2";
    } else {
        rep.verdict = LimitVerdict::Fail;
        rep.note = "confidence interval at the smallest maturity misses 1/2";
    }
    return rep;
}

nlohmann::json AtmDigitalReport::to_json() const {
    nlohmann::json j;
    j["verdict"] = limit_verdict_name(verdict);
    j["note"] = note;
    nlohmann::json rows_j = nlohmann::json::array();
    for (const AtmDigitalRow& r : rows)
        rows_j.push_back({{"T", r.t},
                          {"level", r.level},
                          {"prob", r.est.prob},
                          {"ci_low", r.est.prob_ci_low},
                          {"ci_high", r.est.prob_ci_high},
                          {"price", r.est.price},
                          {"discount", r.est.discount},
                          {"n_paths", r.est.n_paths},
                          {"exact", r.est.exact},
                          {"contains_half", r.ci_contains_half}});
    j["rows"] = std::move(rows_j);
    return j;
}

void AtmDigitalReport::write_csv(std::ostream& out) const {
    out << "T,prob,ci_low,ci_high,contains_half\n";
    for (const AtmDigitalRow& r : rows) {
        csv_number(out, r.t);
        out << ',';
        csv_number(out, r.est.prob);
        out << ',';
        csv_number(out, r.est.prob_ci_low);
        out << ',';
        csv_number(out, r.est.prob_ci_high);
        out << ',' << (r.ci_contains_half ? "1" : "0") << '\n';
    }
}

} // namespace smalltime::pricing
