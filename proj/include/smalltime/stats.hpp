#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace smalltime::stats {

// ============================================================
// Distribution functions
// ============================================================

double normal_pdf(double x);

// Phi(x), absolute error well below 1e-10 on [-8, 8].
double normal_cdf(double x);

// Phi^{-1}(p) for p in (0,1); throws std::domain_error outside.
// Round trip normal_cdf(normal_quantile(p)) stays within 1e-12 of p
// for p in [1e-10, 1-1e-10].
double normal_quantile(double p);

// Regularized lower incomplete gamma P(shape, x/scale), i.e. the CDF of a
// Gamma(shape, scale) variable at x. Relative error <= 1e-8 for
// shape in [1e-3, 1e3]. shape and scale must be positive.
double gamma_cdf(double x, double shape, double scale);

// Inverse of gamma_cdf in x by bracketed bisection (monotone CDF).
double gamma_quantile(double p, double shape, double scale);

// ============================================================
// Goodness of fit and interval estimates
// ============================================================

struct KSReport {
    double statistic = 0.0;   // sup-norm distance of ECDF to the reference CDF
    std::size_t n = 0;
    double level = 0.001;     // test level used for the critical value
    double critical = 0.0;    // asymptotic critical value at `level`
    bool pass = false;        // statistic <= critical
};

// Asymptotic Kolmogorov critical value sqrt(-ln(level/2)/2) / sqrt(n);
// at the default level 0.001 this is the 1.949/sqrt(n) rule.
double ks_critical(std::size_t n, double level = 0.001);

// One-sample Kolmogorov-Smirnov test against a continuous reference CDF.
// The statistic is invariant under strictly monotone transforms applied
// consistently to sample and reference. Throws on an empty sample.
KSReport ks_one_sample(std::vector<double> sample,
                       const std::function<double(double)>& cdf,
                       double level = 0.001);

// Two-sample variant; critical value scales by sqrt((n+m)/(n*m)).
KSReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double level = 0.001);

struct ProbEstimate {
    double p_hat = 0.0;
    std::size_t n = 0;
    double ci_low = 0.0;      // Wilson score interval
    double ci_high = 0.0;
    double confidence = 0.99;
};

// Wilson score interval for a binomial proportion. Valid for k in [0, n];
// the interval always stays inside [0, 1].
ProbEstimate wilson_interval(std::size_t successes, std::size_t n, double confidence);

// Fraction of values strictly above `level`, with a Wilson interval.
ProbEstimate prob_exceed_count(const double* begin, const double* end,
                               double level, double confidence = 0.99);

} // namespace smalltime::stats
