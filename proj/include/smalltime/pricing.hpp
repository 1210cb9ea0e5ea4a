#pragma once

#include <ostream>
#include <vector>

#include <json.hpp>

#include "smalltime/models.hpp"
#include "smalltime/simulate.hpp"

// Digital option machinery. The at-the-money digital is the bridge between
// the probabilistic statements and option quotes: its undiscounted value is
// P(X_T > K), which tends to 1/2 as T -> 0 whenever the small-time Gaussian
// limit is non-degenerate.

namespace smalltime::pricing {

// Piecewise-constant short rate. times are the interior breakpoints (strictly
// increasing); rates has one more entry, rates[i] applying on
// [times[i-1], times[i]). Integrals are exact.
struct RateCurve {
    std::vector<double> times;
    std::vector<double> rates;

    static RateCurve constant(double r) { return RateCurve{{}, {r}}; }
    void validate() const;
    double rate_at(double t) const;
    double integral(double T) const;  // int_0^T r(u) du
    double discount(double T) const;  // exp(-integral(T))
    bool is_constant() const { return times.empty(); }
};

// Kinds whose terminal law the simulator can sample without time stepping.
bool exact_terminal_available(const models::ModelSpec& spec);

double bs_call(double s0, double k, double r, double t, double sigma);
double bs_vega(double s0, double k, double r, double t, double sigma);
// Cash-or-nothing call paying 1 on {S_T > K}: exp(-rT) Phi(d2).
double bs_digital(double s0, double k, double r, double t, double sigma);

struct VolQuote {
    double k = 0.0, t = 0.0;
    double sigma = 0.0;
    double residual = 0.0;  // |model price - target| after polishing
    int iterations = 0;
};

// Inverts bs_call in sigma. The price must lie strictly between the
// discounted intrinsic value and s0, otherwise NoArbViolation.
VolQuote implied_vol(double call_price, double s0, double k, double r, double t);

struct DigitalEstimate {
    double t = 0.0, k = 0.0;
    double discount = 1.0;
    double prob = 0.0, prob_ci_low = 0.0, prob_ci_high = 0.0;
    double price = 0.0, price_ci_low = 0.0, price_ci_high = 0.0;
    std::size_t n_paths = 0;
    bool exact = false;  // closed-form terminal law was available
};

// Price of the digital call under the model with the given rate curve. The
// curve's integral replaces any constant-rate parameter of the model, which
// is exact for dynamics where the rate enters the log additively. Confidence
// intervals are Wilson intervals on the exceedance probability.
DigitalEstimate mc_digital(const models::ModelSpec& model, double k, double t,
                           const RateCurve& rc, const sim::SimConfig& config,
                           double confidence = 0.99);

enum class LimitVerdict { Pass, Fail, NotApplicable };
std::string limit_verdict_name(LimitVerdict v);

struct AtmDigitalRow {
    double t = 0.0;
    double level = 0.0;
    DigitalEstimate est;
    bool ci_contains_half = false;
};

struct AtmDigitalReport {
    std::vector<AtmDigitalRow> rows;
    LimitVerdict verdict = LimitVerdict::Fail;
    std::string note;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;  // T,prob,ci_low,ci_high,contains_half
};

// Tracks the undiscounted at-the-money digital along a maturity schedule.
// The strike sits at the starting observable (for the square of a Bessel
// part started at zero, at the moving level delta * T). Pass means the
// confidence interval at the smallest maturity contains 1/2. Models whose
// small-time limit collapses throw DegenerateLimit when strict, and are
// reported with a NotApplicable verdict when not.
AtmDigitalReport atm_digital_limit_check(const models::ModelSpec& model,
                                         const std::vector<double>& t_schedule,
                                         const sim::SimConfig& config,
                                         double confidence = 0.99, bool strict = true);

} // namespace smalltime::pricing
