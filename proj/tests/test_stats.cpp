#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "smalltime/rng.hpp"
#include "smalltime/stats.hpp"

using namespace smalltime;

namespace {

// Reference values computed with 30-digit arithmetic, independent of the
// implementations under test.
constexpr double kPhi005 = 0.519938805838372462;
constexpr double kZ975 = 1.959963984540054236;
constexpr double kGamma12at2 = 0.632120558828557678;    // 1 - e^{-1}
constexpr double kGammaTail = 0.486701201720851335;     // P(Gamma(100,2) > 200)
constexpr double kGamma752 = 0.7167933177458811227;     // gamma_cdf(7.5, 3.2, 1.9)
constexpr double kKsFactor = 1.949474603520405233;      // sqrt(-ln(0.0005)/2)
constexpr double kWilsonLo = 0.5797945446495353968;     // k=620, n=1000, 99%
constexpr double kWilsonHi = 0.6586235757736469638;

} // namespace

TEST_CASE("normal cdf matches reference values") {
    CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(stats::normal_cdf(0.05) == doctest::Approx(kPhi005).epsilon(1e-14));
    CHECK(stats::normal_cdf(-8.0) > 0.0);
    CHECK(stats::normal_cdf(8.0) < 1.0);
    CHECK(stats::normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
}

TEST_CASE("normal cdf symmetry Phi(x) + Phi(-x) = 1") {
    for (double x = -8.0; x <= 8.0; x += 0.17)
        CHECK(std::fabs(stats::normal_cdf(x) + stats::normal_cdf(-x) - 1.0) <= 1e-12);
}

TEST_CASE("normal quantile matches reference and round trips") {
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(kZ975).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));

    for (double p : {1e-10, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6, 1.0 - 1e-10})
        CHECK(std::fabs(stats::normal_cdf(stats::normal_quantile(p)) - p) <= 1e-12);

    CHECK_THROWS_AS(stats::normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(stats::normal_quantile(1.0), std::domain_error);
}

TEST_CASE("gamma cdf matches reference values") {
    CHECK(stats::gamma_cdf(2.0, 1.0, 2.0) == doctest::Approx(kGamma12at2).epsilon(1e-12));
    CHECK(1.0 - stats::gamma_cdf(200.0, 100.0, 2.0) == doctest::Approx(kGammaTail).epsilon(1e-10));
    CHECK(stats::gamma_cdf(7.5, 3.2, 1.9) == doctest::Approx(kGamma752).epsilon(1e-10));
    CHECK(stats::gamma_cdf(0.0, 2.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("gamma cdf saturates far in the right tail") {
    for (double shape : {0.5, 1.0, 3.0, 50.0}) {
        const double mean = shape * 1.3;
        CHECK(stats::gamma_cdf(50.0 * mean, shape, 1.3) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("gamma quantile round trips through the cdf") {
    for (double p : {0.01, 0.2, 0.5, 0.8, 0.99})
        for (double shape : {0.7, 2.5, 40.0}) {
            const double x = stats::gamma_quantile(p, shape, 1.7);
            CHECK(stats::gamma_cdf(x, shape, 1.7) == doctest::Approx(p).epsilon(1e-8));
        }
}

TEST_CASE("ks critical value at the default level") {
    CHECK(stats::ks_critical(1, 0.001) == doctest::Approx(kKsFactor).epsilon(1e-12));
    CHECK(stats::ks_critical(100000, 0.001) ==
          doctest::Approx(kKsFactor / std::sqrt(100000.0)).epsilon(1e-12));
    CHECK(stats::ks_critical(100) > stats::ks_critical(400));
}

TEST_CASE("ks one sample statistic on a fixed sample") {
    const std::vector<double> sample = {0.1, 0.239, 0.55, 0.71, 0.98};
    const auto rep = stats::ks_one_sample(sample, [](double x) { return x; }, 0.001);
    CHECK(rep.statistic == doctest::Approx(0.18).epsilon(1e-15));
    CHECK(rep.n == 5);
    CHECK_THROWS(stats::ks_one_sample({}, [](double x) { return x; }));
}

TEST_CASE("ks statistic is invariant under monotone transforms") {
    std::vector<double> sample;
    rng::Xoshiro256pp gen(7);
    for (int i = 0; i < 2000; ++i) sample.push_back(rng::uniform01(gen));

    const auto plain = stats::ks_one_sample(sample, [](double x) { return x; });
    std::vector<double> mapped;
    for (double x : sample) mapped.push_back(std::exp(x));
    const auto warped = stats::ks_one_sample(
        mapped, [](double y) { return std::log(y); });
    CHECK(plain.statistic == warped.statistic);
}

TEST_CASE("ks one sample accepts its own reference distribution") {
    std::vector<double> sample;
    const std::size_t n = 50000;
    for (std::size_t i = 0; i < n; ++i)
        sample.push_back(stats::normal_quantile((i + 0.5) / n));
    const auto rep = stats::ks_one_sample(sample, [](double x) { return stats::normal_cdf(x); });
    CHECK(rep.pass);
    CHECK(rep.statistic < rep.critical);
}

TEST_CASE("ks two sample separates disjoint samples and accepts equal ones") {
    std::vector<double> a, b;
    for (int i = 0; i < 100; ++i) {
        a.push_back(i);
        b.push_back(i + 1000);
    }
    const auto apart = stats::ks_two_sample(a, b);
    CHECK(apart.statistic == doctest::Approx(1.0));
    CHECK_FALSE(apart.pass);

    const auto same = stats::ks_two_sample(a, a);
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.pass);
}

TEST_CASE("wilson interval matches the reference and stays in [0,1]") {
    const auto est = stats::wilson_interval(620, 1000, 0.99);
    CHECK(est.p_hat == doctest::Approx(0.62).epsilon(1e-15));
    CHECK(est.ci_low == doctest::Approx(kWilsonLo).epsilon(1e-12));
    CHECK(est.ci_high == doctest::Approx(kWilsonHi).epsilon(1e-12));

    const auto zero = stats::wilson_interval(0, 50, 0.99);
    CHECK(zero.ci_low == doctest::Approx(0.0));
    CHECK(zero.ci_high > 0.0);
    CHECK(zero.ci_high < 1.0);

    const auto full = stats::wilson_interval(50, 50, 0.99);
    CHECK(full.ci_high == doctest::Approx(1.0));
    CHECK(full.ci_low < 1.0);
}

TEST_CASE("wilson interval covers the true proportion") {
    // 1000 independent binomial(n=10000, p=0.3) experiments; the 99%
    // interval must cover p far more often than the 93% floor asserted here.
    const double p = 0.3;
    const std::size_t n = 10000;
    int covered = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
        auto gen = rng::substream(2024, rep);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (rng::uniform01(gen) < p) ++k;
        const auto est = stats::wilson_interval(k, n, 0.99);
        if (est.ci_low <= p && p <= est.ci_high) ++covered;
    }
    CHECK(covered >= 930);
}

TEST_CASE("prob_exceed_count counts strictly above the level") {
    const std::vector<double> v = {-1.0, 0.0, 0.5, 2.0};
    const auto est = stats::prob_exceed_count(v.data(), v.data() + v.size(), 0.0, 0.99);
    CHECK(est.p_hat == doctest::Approx(0.5));
    CHECK(est.n == 4);
    CHECK(est.ci_low < 0.5);
    CHECK(est.ci_high > 0.5);
}
