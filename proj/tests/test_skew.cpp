#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "smalltime/errors.hpp"
#include "smalltime/skew.hpp"
#include "smalltime/stats.hpp"

using namespace smalltime;
using models::Kind;

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;
constexpr double kCltConst = 0.088305751688660602;   // sqrt(log2 / 2) * 0.15
constexpr double kBandUpper = 0.001213496939953409;  // c=0.15, sigma=0.2, s0=100
constexpr double kBandLower = -0.003213496939953409;

const auto kGbm = models::make_model(Kind::GBM, {{"sigma", 0.2}, {"r", 0.05}}, {100.0});

sim::SimConfig mc_config(std::size_t n_paths) {
    sim::SimConfig cfg;
    cfg.n_paths = n_paths;
    cfg.seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("slope band constant and bounds match the reference") {
    CHECK(skew::clt_constant(0.15) == doctest::Approx(kCltConst).epsilon(1e-14));

    const auto band = skew::clt_slope_bounds(0.15, 0.2, 100.0, 0.01);
    CHECK(band.upper == doctest::Approx(kBandUpper).epsilon(1e-12));
    CHECK(band.lower == doctest::Approx(kBandLower).epsilon(1e-12));
    CHECK(band.width() == doctest::Approx(2.0 * kSqrt2Pi * kCltConst / 100.0).epsilon(1e-12));

    // the band does not move with maturity
    const auto later = skew::clt_slope_bounds(0.15, 0.2, 100.0, 0.25);
    CHECK(later.lower == doctest::Approx(band.lower).epsilon(1e-15));
    CHECK(later.upper == doctest::Approx(band.upper).epsilon(1e-15));
}

TEST_CASE("remainder budget recomputes from its definition") {
    for (double t : {1e-3, 0.04, 0.25}) {
        const double r = 0.05, sigma = 0.2, s0 = 100.0;
        const double direct = kSqrt2Pi / s0 *
                              (2.0 * std::max(std::fabs(r), sigma * sigma) * std::sqrt(t) +
                               sigma * sigma * sigma * t);
        CHECK(skew::remainder_budget(r, sigma, s0, t) == doctest::Approx(direct).epsilon(1e-13));
    }
    CHECK(skew::remainder_budget(0.05, 0.2, 100.0, 1e-6) <
          skew::remainder_budget(0.05, 0.2, 100.0, 1e-2));
}

TEST_CASE("model free band recomputes from the monotonicity argument") {
    const double s0 = 100.0, r = 0.03, t = 0.25, sigma = 0.2;
    const double st = sigma * std::sqrt(t);
    const double d1 = (r * t) / st + st / 2.0;  // at the money
    const double d2 = d1 - st;
    const double a = kSqrt2Pi * std::exp(d1 * d1 / 2.0 - r * t) / (s0 * std::sqrt(t));
    const auto band = skew::model_free_slope_bounds(s0, s0, r, t, sigma);
    CHECK(band.upper == doctest::Approx(stats::normal_cdf(d2) * a).epsilon(1e-12));
    CHECK(band.lower ==
          doctest::Approx(-(1.0 - stats::normal_cdf(d2)) * a).epsilon(1e-12));
    CHECK(band.width() == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("model free band width grows like one over sqrt t") {
    // at r = 0 the exponential correction is O(t), so widths scale cleanly
    const double w1 = skew::model_free_slope_bounds(100.0, 100.0, 0.0, 1e-4, 0.2).width();
    const double w2 = skew::model_free_slope_bounds(100.0, 100.0, 0.0, 4e-4, 0.2).width();
    CHECK(w1 / w2 == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("analytic atm slope of gbm is flat") {
    const auto est = skew::atm_slope_analytic(kGbm, 0.01);
    CHECK(est.sigma_imp_atm == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(std::fabs(est.slope) <= 1e-7);
    CHECK(est.dk > 0.0);

    const auto bm = models::make_model(Kind::DriftedBM, {{"b", 0.1}, {"sigma", 1.0}}, {0.0});
    CHECK_THROWS_AS(skew::atm_slope_analytic(bm, 0.01), BadInput);
}

TEST_CASE("monte carlo atm slope of gbm is flat within its standard error") {
    const auto est = skew::atm_slope_mc(kGbm, 0.01, mc_config(200000));
    CHECK(est.se > 0.0);
    CHECK(std::fabs(est.slope) <= 5.0 * est.se);
    CHECK(est.sigma_imp_atm == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("compare_bounds places the gbm slope inside both bands") {
    const auto rep = skew::compare_bounds(kGbm, 0.01, mc_config(1000), /*analytic=*/true);
    CHECK(rep.in_clt == skew::BandVerdict::Inside);
    CHECK(rep.in_model_free == skew::BandVerdict::Inside);
    CHECK(skew::band_verdict_name(rep.in_clt) == "inside");
    CHECK(rep.clt_band.lower == doctest::Approx(kBandLower).epsilon(1e-6));
    CHECK(rep.clt_band.upper == doctest::Approx(kBandUpper).epsilon(1e-6));
    CHECK(rep.width_ratio > 0.0);
    CHECK(rep.width_ratio == doctest::Approx(rep.clt_band.width() / rep.mf_band.width())
                                 .epsilon(1e-12));
}

TEST_CASE("compare_bounds reports n/a outside the bounded drift class") {
    // state-dependent volatility has no finite drift-to-volatility bound,
    // yet the slope itself is still estimable from the positive start
    const auto cev = models::make_model(Kind::CEV, {{"sigma", 2.0}, {"beta", 0.5}}, {100.0});
    sim::SimConfig cfg = mc_config(4000);
    cfg.h_max = 1e-3;
    const auto rep = skew::compare_bounds(cev, 0.01, cfg, /*analytic=*/false);
    CHECK(rep.in_clt == skew::BandVerdict::NotApplicable);
    CHECK(std::isnan(rep.width_ratio));
}

TEST_CASE("width ratios follow the sqrt t law across maturities") {
    std::vector<skew::SkewReport> reports;
    for (int k = 2; k <= 10; ++k)
        reports.push_back(
            skew::compare_bounds(kGbm, std::pow(2.0, -k), mc_config(1000), /*analytic=*/true));
    const auto chk = skew::width_ratio_check(reports);
    CHECK(chk.pass);
    CHECK(chk.max_rel_dev <= 0.10);
    REQUIRE(chk.t.size() == 9);
    CHECK(chk.reference > 0.0);
    // ratios shrink with maturity along the schedule
    CHECK(chk.ratio.front() > chk.ratio.back());
}

TEST_CASE("width ratio check validates its input") {
    CHECK_THROWS_AS(skew::width_ratio_check({}), BadInput);
    const auto one = skew::compare_bounds(kGbm, 0.01, mc_config(1000), true);
    CHECK_THROWS_AS(skew::width_ratio_check({one}), BadInput);

    const auto cev = models::make_model(Kind::CEV, {{"sigma", 2.0}, {"beta", 0.5}}, {100.0});
    sim::SimConfig cfg = mc_config(4000);
    cfg.h_max = 1e-3;
    const auto na = skew::compare_bounds(cev, 0.01, cfg, false);
    CHECK_THROWS_AS(skew::width_ratio_check({one, na}), BadInput);
}

TEST_CASE("skew reports serialize and write their csv") {
    std::vector<skew::SkewReport> reports = {
        skew::compare_bounds(kGbm, 0.01, mc_config(1000), true),
        skew::compare_bounds(kGbm, 0.04, mc_config(1000), true),
    };
    const auto j = reports[0].to_json();
    CHECK(j.contains("clt_lower"));
    CHECK(j.contains("mf_upper"));
    CHECK(j["in_model_free"] == "inside");

    std::ostringstream out;
    skew::write_csv(out, reports);
    CHECK(out.str().rfind("T,slope_est,slope_se,clt_lower,clt_upper,budget,"
                          "mf_lower,mf_upper,in_clt,in_model_free,width_ratio",
                          0) == 0);
}
