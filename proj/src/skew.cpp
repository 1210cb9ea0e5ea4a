#include "smalltime/skew.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "smalltime/bounds.hpp"
#include "smalltime/errors.hpp"
#include "smalltime/stats.hpp"

namespace smalltime::skew {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kSqrt2Pi = 2.50662827463100050242;

void csv_number(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
}

void require_slope_inputs(double sigma_imp, double s0, double t) {
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw BadInput("spot must be positive");
    if (!(sigma_imp > 0.0) || !std::isfinite(sigma_imp))
        throw BadInput("implied volatility must be positive");
    if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("maturity must be positive");
}

double strike_offset(double s0, double sigma_imp, double t, double dk_rel) {
    if (dk_rel > 0.0) return s0 * dk_rel;
    const double dk = s0 * std::max(1e-3, sigma_imp * std::sqrt(t) / 10.0);
    return std::min(dk, 0.5 * s0);
}

double discounted_call_price(const std::vector<double>& terminal, double k, double df) {
    double acc = 0.0;
    for (double s : terminal) acc += std::max(s - k, 0.0);
    return df * acc / static_cast<double>(terminal.size());
}

} // namespace

double clt_constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw BadInput("drift bound c must be >= 0");
    return std::sqrt(kLog2 / 2.0) * c;
}

SlopeBand clt_slope_bounds(double c, double sigma_imp_atm, double s0, double t) {
    require_slope_inputs(sigma_imp_atm, s0, t);
    const double big_c = clt_constant(c);
    const double atm_term = sigma_imp_atm / (2.0 * s0);
    SlopeBand band;
    band.lower = -kSqrt2Pi * big_c / s0 - atm_term;
    band.upper = kSqrt2Pi * big_c / s0 - atm_term;
    return band;
}

double remainder_budget(double r, double sigma_imp, double s0, double t) {
    require_slope_inputs(sigma_imp, s0, t);
    if (!std::isfinite(r)) throw BadInput("rate must be finite");
    const double srt = sigma_imp * std::sqrt(t);
    return (kSqrt2Pi / (s0 * std::sqrt(t))) *
           (2.0 * std::max(std::fabs(r), sigma_imp * sigma_imp) * t + srt * srt * srt);
}

SlopeBand model_free_slope_bounds(double s0, double k, double r, double t,
                                  double sigma_imp) {
    require_slope_inputs(sigma_imp, s0, t);
    if (!(k > 0.0) || !std::isfinite(k)) throw BadInput("strike must be positive");
    if (!std::isfinite(r)) throw BadInput("rate must be finite");
    const double srt = sigma_imp * std::sqrt(t);
    const double d1 = (std::log(s0 / k) + (r + 0.5 * sigma_imp * sigma_imp) * t) / srt;
    const double d2 = d1 - srt;
    const double a = kSqrt2Pi * std::exp(0.5 * d1 * d1 - r * t) / (s0 * std::sqrt(t));
    SlopeBand band;
    band.lower = -(1.0 - stats::normal_cdf(d2)) * a;
    band.upper = stats::normal_cdf(d2) * a;
    return band;
}

SlopeEstimate atm_slope_analytic(const models::ModelSpec& model, double t, double dk_rel) {
    models::validate(model);
    if (model.kind != models::Kind::GBM)
        throw BadInput("closed-form slope needs closed-form call prices (GBM)");
    if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("maturity must be positive");
    const double s0 = model.observable_start()[0];
    const double r = model.param("r");
    const double sigma = model.param("sigma");

    SlopeEstimate est;
    est.t = t;
    est.sigma_imp_atm = pricing::implied_vol(pricing::bs_call(s0, s0, r, t, sigma),
                                             s0, s0, r, t).sigma;
    est.dk = strike_offset(s0, est.sigma_imp_atm, t, dk_rel);
    const double kl = s0 - est.dk, ku = s0 + est.dk;
    const double vol_lo = pricing::implied_vol(pricing::bs_call(s0, kl, r, t, sigma),
                                               s0, kl, r, t).sigma;
    const double vol_hi = pricing::implied_vol(pricing::bs_call(s0, ku, r, t, sigma),
                                               s0, ku, r, t).sigma;
    est.slope = (vol_hi - vol_lo) / (2.0 * est.dk);
    est.se = 0.0;
    return est;
}

SlopeEstimate atm_slope_mc(const models::ModelSpec& model, double t,
                           const sim::SimConfig& config, double dk_rel) {
    models::validate(model);
    if (model.dim != 1) throw BadInput("atm_slope_mc handles scalar models only");
    if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("maturity must be positive");
    const double s0 = model.observable_start()[0];
    if (!(s0 > 0.0)) throw BadInput("atm_slope_mc needs a positive starting observable");
    const double r = model.param_or("r", 0.0);
    const double df = std::exp(-r * t);

    sim::SimConfig cfg = config;
    if (pricing::exact_terminal_available(model)) cfg.scheme = sim::Scheme::Exact;
    const sim::MCSample sample = sim::simulate_terminal(model, t, cfg);
    const std::vector<double> terminal = sample.column(0);
    const std::size_t n = terminal.size();

    const auto invert = [&](double price, double k) {
        try {
            return pricing::implied_vol(price, s0, k, r, t).sigma;
        } catch (const NoArbViolation&) {
            throw StatisticalFailure(
                "Monte Carlo call price not invertible to a volatility; increase paths");
        }
    };

    SlopeEstimate est;
    est.t = t;
    est.sigma_imp_atm = invert(discounted_call_price(terminal, s0, df), s0);
    est.dk = strike_offset(s0, est.sigma_imp_atm, t, dk_rel);
    const double kl = s0 - est.dk, ku = s0 + est.dk;

    // One sample prices all three strikes; per-path payoff differences carry
    // the strike sensitivity with the path noise cancelled.
    const double vol_lo = invert(discounted_call_price(terminal, kl, df), kl);
    const double vol_hi = invert(discounted_call_price(terminal, ku, df), ku);
    est.slope = (vol_hi - vol_lo) / (2.0 * est.dk);

    double mean_d = 0.0;
    for (double s : terminal)
        mean_d += std::max(s - kl, 0.0) - std::max(s - ku, 0.0);
    mean_d /= static_cast<double>(n);
    double var_d = 0.0;
    for (double s : terminal) {
        const double d = std::max(s - kl, 0.0) - std::max(s - ku, 0.0) - mean_d;
        var_d += d * d;
    }
    var_d /= static_cast<double>(n);
    const double vega = pricing::bs_vega(s0, s0, r, t, est.sigma_imp_atm);
    if (!(vega > 0.0))
        throw StatisticalFailure("vanishing vega at the money; slope error undefined");
    est.se = df * std::sqrt(var_d / static_cast<double>(n)) / (2.0 * est.dk * vega);
    return est;
}

std::string band_verdict_name(BandVerdict v) {
    switch (v) {
        case BandVerdict::Inside: return "inside";
        case BandVerdict::Outside: return "outside";
        case BandVerdict::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

SkewReport compare_bounds(const models::ModelSpec& model, double t,
                          const sim::SimConfig& config, bool analytic) {
    SkewReport rep;
    rep.t = t;
    rep.est = analytic ? atm_slope_analytic(model, t)
                       : atm_slope_mc(model, t, config);
    const double s0 = model.observable_start()[0];
    const double r = model.param_or("r", 0.0);

    rep.mf_band = model_free_slope_bounds(s0, s0, r, t, rep.est.sigma_imp_atm);
    rep.in_model_free = (rep.est.slope >= rep.mf_band.lower &&
                         rep.est.slope <= rep.mf_band.upper)
                            ? BandVerdict::Inside
                            : BandVerdict::Outside;

    try {
        const double c = bounds::drift_bound_for_model(model);
        rep.clt_band = clt_slope_bounds(c, rep.est.sigma_imp_atm, s0, t);
        rep.budget = remainder_budget(r, rep.est.sigma_imp_atm, s0, t);
        rep.in_clt = (rep.est.slope >= rep.clt_band.lower - rep.budget &&
                      rep.est.slope <= rep.clt_band.upper + rep.budget)
                         ? BandVerdict::Inside
                         : BandVerdict::Outside;
        rep.width_ratio = rep.clt_band.width() / rep.mf_band.width();
    } catch (const OutOfScope&) {
        rep.in_clt = BandVerdict::NotApplicable;
        rep.clt_band = SlopeBand{};
        rep.budget = 0.0;
        rep.width_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

WidthRatioCheck width_ratio_check(const std::vector<SkewReport>& reports, double rel_tol) {
    if (reports.size() < 2) throw BadInput("width_ratio_check needs at least two maturities");
    WidthRatioCheck chk;
    for (const SkewReport& r : reports) {
        if (r.in_clt == BandVerdict::NotApplicable || !std::isfinite(r.width_ratio))
            throw BadInput("width_ratio_check needs reports with a valid drift-bound band");
        chk.t.push_back(r.t);
        chk.ratio.push_back(r.width_ratio);
        chk.scaled.push_back(r.width_ratio / std::sqrt(r.t));
    }
    const std::size_t idx_large = static_cast<std::size_t>(
        std::max_element(chk.t.begin(), chk.t.end()) - chk.t.begin());
    chk.reference = chk.scaled[idx_large];
    if (!(chk.reference > 0.0)) throw BadInput("width_ratio_check: degenerate reference ratio");
    chk.max_rel_dev = 0.0;
    for (double s : chk.scaled)
        chk.max_rel_dev = std::max(chk.max_rel_dev, std::fabs(s / chk.reference - 1.0));
    chk.pass = chk.max_rel_dev <= rel_tol;
    return chk;
}

nlohmann::json SkewReport::to_json() const {
    return nlohmann::json{
        {"T", t},
        {"slope", est.slope},
        {"slope_se", est.se},
        {"sigma_imp_atm", est.sigma_imp_atm},
        {"dk", est.dk},
        {"clt_lower", clt_band.lower},
        {"clt_upper", clt_band.upper},
        {"budget", budget},
        {"mf_lower", mf_band.lower},
        {"mf_upper", mf_band.upper},
        {"in_clt", band_verdict_name(in_clt)},
        {"in_model_free", band_verdict_name(in_model_free)},
        {"width_ratio", width_ratio}};
}

void write_csv(std::ostream& out, const std::vector<SkewReport>& reports) {
    out << "T,slope_est,slope_se,clt_lower,clt_upper,budget,mf_lower,mf_upper,"
           "in_clt,in_model_free,width_ratio\n";
    for (const SkewReport& r : reports) {
        csv_number(out, r.t);
        out << ',';
        csv_number(out, r.est.slope);
        out << ',';
        csv_number(out, r.est.se);
        out << ',';
        csv_number(out, r.clt_band.lower);
        out << ',';
        csv_number(out, r.clt_band.upper);
        out << ',';
        csv_number(out, r.budget);
        out << ',';
        csv_number(out, r.mf_band.lower);
        out << ',';
        csv_number(out, r.mf_band.upper);
        out << ',' << band_verdict_name(r.in_clt) << ','
            << band_verdict_name(r.in_model_free) << ',';
        csv_number(out, r.width_ratio);
        out << '\n';
    }
}

} // namespace smalltime::skew
