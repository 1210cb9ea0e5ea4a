#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smalltime/models.hpp"
#include "smalltime/simulate.hpp"

// Two-sided bounds on P(X_t > x0) for a local martingale perturbed by a
// drift whose density is bounded by c times the volatility. With
// s = c sqrt(t / (2 log 2)) the exponents are
//   f1 = -log2 (1 + s)^2,   f2 = -log2 (1 - s)^2,
// giving e^{f1} <= P(X_t > x0) <= e^{f2} for t below the horizon
// t* = 2 log 2 / c^2. Both sides expand to 1/2 -+ s log 2 + O(t).

namespace smalltime::bounds {

// Largest time the upper bound stays informative; infinite when c = 0.
double horizon(double c);

struct BoundPair {
    double s = 0.0;
    double f1 = 0.0, f2 = 0.0;
    double e_f1 = 0.5, e_f2 = 0.5;
    double expansion_lo = 0.5, expansion_hi = 0.5;
    double p_lower = 0.0, p_upper = 0.0;  // optimal conjugate exponents per side
    bool in_horizon = true;
};

// Pointwise evaluation. Exactly 1/2 on both sides when c = 0 or t = 0.
// At or beyond the horizon the upper side saturates: f2 = 0, e^{f2} = 1,
// and p_upper (raw 1/s) stops being a valid exponent.
BoundPair bounds_at(double c, double t);

struct BoundsCurve {
    double c = 0.0;
    double horizon = 0.0;
    std::vector<double> t;
    std::vector<BoundPair> rows;

    nlohmann::json to_json() const;
    // t,f1,f2,e_f1,e_f2,expansion_lo,expansion_hi,p_lower,p_upper,in_horizon
    void write_csv(std::ostream& out) const;
};

BoundsCurve girsanov_bounds(double c, const std::vector<double>& t_grid);

struct ExpansionError {
    double t = 0.0;
    double lower_ratio = 0.0;  // |e^{f1} - expansion_lo| / t
    double upper_ratio = 0.0;  // |e^{f2} - expansion_hi| / t
};

// The ratios stay bounded as t -> 0 and converge to expansion_error_limit.
std::vector<ExpansionError> expansion_error(double c, const std::vector<double>& t_grid);
double expansion_error_limit(double c);  // c^2 (log2 / 2 - 1/4)

// Drift-to-volatility bound c for models in the bounded-drift class;
// throws OutOfScope for the rest.
double drift_bound_for_model(const models::ModelSpec& spec);

struct BracketRow {
    double t = 0.0;
    double prob = 0.0;               // P(X_t > x0), exact or estimated
    double ci_low = 0.0, ci_high = 0.0;
    double lower = 0.0, upper = 0.0; // e^{f1}, e^{f2}
    bool exact = false;
    bool pass = false;
};

struct BracketReport {
    double c = 0.0;
    std::vector<BracketRow> rows;
    bool all_pass = false;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

// Checks the bound brackets the model's own up-probability on a grid.
// Closed forms where the model admits one, otherwise a Monte Carlo
// estimate whose 99% confidence interval must overlap the band.
BracketReport verify_bracketing(const models::ModelSpec& model,
                                const std::vector<double>& t_grid,
                                const sim::SimConfig& config);

} // namespace smalltime::bounds
