#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smalltime/models.hpp"
#include "smalltime/pricing.hpp"
#include "smalltime/simulate.hpp"

// At-the-money implied volatility skew bounds at short maturity. The
// drift-bound machinery turns the digital bracket into a band for the
// smile slope d sigma_imp / dK at K = S0:
//   -+ sqrt(2pi) C / S0 - sigma_imp / (2 S0),   C = sqrt(log2 / 2) c,
// a T-independent band, while the generic no-arbitrage band for the same
// slope widens like 1/sqrt(T). Their width ratio therefore follows a
// sqrt(T) law.

namespace smalltime::skew {

struct SlopeBand {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

double clt_constant(double c);  // C = sqrt(log2 / 2) * c

// Band for the ATM slope implied by a drift-to-volatility bound c. The
// maturity only enters validation; the band itself is constant in T.
SlopeBand clt_slope_bounds(double c, double sigma_imp_atm, double s0, double t);

// Allowance for the O(T) terms dropped from the band's expansion:
// sqrt(2pi)/S0 * (2 max(|r|, sigma^2) sqrt(T) + sigma^3 T).
double remainder_budget(double r, double sigma_imp, double s0, double t);

// Slope band from monotonicity of the call price in the strike alone:
// [-(1 - Phi(d2)) A, Phi(d2) A] with A = sqrt(2pi) e^{d1^2/2 - rT} / (S0 sqrt(T)).
SlopeBand model_free_slope_bounds(double s0, double k, double r, double t,
                                  double sigma_imp);

struct SlopeEstimate {
    double t = 0.0;
    double dk = 0.0;              // strike offset used by the central difference
    double slope = 0.0;           // d sigma_imp / dK at K = S0
    double se = 0.0;
    double sigma_imp_atm = 0.0;
};

// Slope through exact call prices; the model must admit them (GBM).
SlopeEstimate atm_slope_analytic(const models::ModelSpec& model, double t,
                                 double dk_rel = 0.0);

// Slope from one simulated terminal sample shared by all three strikes, so
// the strike difference is a common-random-number estimate. Throws
// StatisticalFailure when a Monte Carlo price cannot be inverted to a vol.
SlopeEstimate atm_slope_mc(const models::ModelSpec& model, double t,
                           const sim::SimConfig& config, double dk_rel = 0.0);

enum class BandVerdict { Inside, Outside, NotApplicable };
std::string band_verdict_name(BandVerdict v);

struct SkewReport {
    double t = 0.0;
    SlopeEstimate est;
    SlopeBand clt_band;
    double budget = 0.0;          // clt verdict uses the band widened by this
    SlopeBand mf_band;
    BandVerdict in_clt = BandVerdict::NotApplicable;
    BandVerdict in_model_free = BandVerdict::NotApplicable;
    double width_ratio = 0.0;     // clt width / model-free width

    nlohmann::json to_json() const;
};

// Estimates the slope and places it against both bands. Models without a
// finite drift-to-volatility bound get a NotApplicable clt verdict.
SkewReport compare_bounds(const models::ModelSpec& model, double t,
                          const sim::SimConfig& config, bool analytic = false);

struct WidthRatioCheck {
    std::vector<double> t;
    std::vector<double> ratio;        // width_ratio per report
    std::vector<double> scaled;       // ratio / sqrt(t)
    double reference = 0.0;           // scaled value at the largest t
    double max_rel_dev = 0.0;
    bool pass = false;                // every scaled value within rel_tol of it
};

// Verifies the width ratios follow the sqrt(T) law across maturities.
WidthRatioCheck width_ratio_check(const std::vector<SkewReport>& reports,
                                  double rel_tol = 0.10);

// T,slope_est,slope_se,clt_lower,clt_upper,budget,mf_lower,mf_upper,
// in_clt,in_model_free,width_ratio
void write_csv(std::ostream& out, const std::vector<SkewReport>& reports);

} // namespace smalltime::skew
