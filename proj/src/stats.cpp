#include "smalltime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smalltime::stats {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
} // namespace

double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    // erfc carries the full relative accuracy into the far tail, unlike
    // 0.5*(1+erf(.)) which loses absolute accuracy past ~ -6.
    return 0.5 * std::erfc(-x / kSqrt2);
}

// ============================================================
// Wichura's algorithm AS 241 (PPND16): rational approximations for the
// normal quantile on three regimes of q = p - 1/2, accurate to ~1e-16.
// ============================================================
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");

    const double q = p - 0.5;
    double r;

    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }

    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

// ============================================================
// Regularized lower incomplete gamma P(a, x).
// Series expansion for x < a+1, Lentz continued fraction for the
// complement otherwise; both converge to near machine precision for
// the shape range this library uses.
// ============================================================
namespace {

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_cdf(double x, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::domain_error("gamma_cdf: shape and scale must be positive");
    if (x <= 0.0) return 0.0;
    const double z = x / scale;
    if (z < shape + 1.0) return gamma_p_series(shape, z);
    return 1.0 - gamma_q_contfrac(shape, z);
}

double gamma_quantile(double p, double shape, double scale) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gamma_quantile: p must be in (0,1)");
    // Bracket by doubling, then bisect. The CDF is strictly increasing on
    // (0, inf) so this is safe, if not the fastest possible.
    double lo = 0.0;
    double hi = shape * scale + scale;
    while (gamma_cdf(hi, shape, scale) < p) {
        hi *= 2.0;
        if (hi > 1e300) throw std::domain_error("gamma_quantile: bracket overflow");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_cdf(mid, shape, scale) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

// ============================================================
// Kolmogorov-Smirnov
// ============================================================

double ks_critical(std::size_t n, double level) {
    if (n == 0) throw std::invalid_argument("ks_critical: empty sample");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("ks_critical: bad level");
    return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(n));
}

KSReport ks_one_sample(std::vector<double> sample,
                       const std::function<double(double)>& cdf, double level) {
    if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        const double up = (static_cast<double>(i) + 1.0) / n - f;
        const double dn = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(up, dn));
    }
    KSReport rep;
    rep.statistic = d;
    rep.n = sample.size();
    rep.level = level;
    rep.critical = ks_critical(sample.size(), level);
    rep.pass = d <= rep.critical;
    return rep;
}

KSReport ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KSReport rep;
    rep.statistic = d;
    rep.n = a.size();
    rep.level = level;
    rep.critical = std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((na + nb) / (na * nb));
    rep.pass = d <= rep.critical;
    return rep;
}

// ============================================================
// Binomial proportion
// ============================================================

ProbEstimate wilson_interval(std::size_t successes, std::size_t n, double confidence) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    if (successes > n) throw std::invalid_argument("wilson_interval: successes > n");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::domain_error("wilson_interval: confidence must be in (0,1)");

    const double z = normal_quantile(0.5 + confidence / 2.0);
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;

    ProbEstimate est;
    est.p_hat = p;
    est.n = n;
    est.ci_low = std::max(0.0, center - half);
    est.ci_high = std::min(1.0, center + half);
    est.confidence = confidence;
    return est;
}

ProbEstimate prob_exceed_count(const double* begin, const double* end,
                               double level, double confidence) {
    if (begin == end) throw std::invalid_argument("prob_exceed: empty sample");
    std::size_t k = 0, n = 0;
    for (const double* p = begin; p != end; ++p, ++n)
        if (*p > level) ++k;   // strict exceedance by contract
    return wilson_interval(k, n, confidence);
}

} // namespace smalltime::stats
