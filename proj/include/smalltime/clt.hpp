#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smalltime/linalg.hpp"
#include "smalltime/models.hpp"
#include "smalltime/simulate.hpp"
#include "smalltime/stats.hpp"

// Small-time Gaussian limit checks. The object under test is the law of
//   Y_t = (f(X_t) - f(x0)) / sqrt(t)
// as t shrinks, against the centered normal with covariance
//   V = (Df(x0) L) (Df(x0) L)^T,
// where L is the model's small-time diffusion matrix. Multivariate
// comparisons reduce to one-dimensional ones along a fixed direction set
// (axes plus a seeded batch of unit vectors).

namespace smalltime::clt {

struct MappingSpec {
    std::string name;
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    std::function<std::vector<double>(const std::vector<double>&)> f;
    std::function<la::Matrix(const std::vector<double>&)> jacobian;
    std::function<bool(const std::vector<double>&)> in_domain;
};

MappingSpec identity_map(std::size_t m);
MappingSpec log_map(std::size_t m);      // domain: strictly positive coordinates
MappingSpec square_map(std::size_t m);
MappingSpec linear_map(const la::Matrix& a);
MappingSpec mapping_from_name(const std::string& name, std::size_t m);

// Central finite differences, step rel_step * max(1,|x_i|) per coordinate.
la::Matrix fd_jacobian(const MappingSpec& mapping, const std::vector<double>& x0,
                       double rel_step = 1e-6);

// Relative eigenvalue floor below which a direction of V counts as collapsed.
inline constexpr double kDegenerateTol = 1e-10;

struct GaussianLimit {
    la::Matrix L;
    la::Matrix V;             // symmetrized product, positive semidefinite
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool degenerate = false;  // lambda_min < kDegenerateTol * max(lambda_max, 0)
};

GaussianLimit limit_covariance(const MappingSpec& mapping, const la::Matrix& L,
                               const std::vector<double>& x0);

// Draws the model at time t and returns rows (f(X_t) - f(x0)) / sqrt(t).
sim::MCSample normalized_increments(const models::ModelSpec& model, const MappingSpec& mapping,
                                    double t, const sim::SimConfig& config);

enum class Verdict { Consistent, Inconsistent, Degenerate };
std::string verdict_name(Verdict v);

struct DirectionResult {
    std::size_t direction_id = 0;
    std::vector<double> direction;
    double variance = 0.0;     // d^T V d
    bool degenerate = false;
    stats::KSReport ks;        // meaningful when the direction is not degenerate
    double q99 = 0.0;          // 99th percentile of |projection|, degenerate directions
};

struct CltSlice {
    double t = 0.0;
    std::vector<DirectionResult> directions;
    bool all_pass = false;     // KS over the non-degenerate directions
};

struct ShrinkCheck {
    std::size_t direction_id = 0;
    double q99_smallest_t = 0.0;
    double q99_largest_t = 0.0;
    bool pass = false;         // quantile collapses along the schedule
};

struct CltReport {
    std::string mapping;
    GaussianLimit limit;
    std::vector<double> t_schedule;
    std::vector<CltSlice> slices;
    std::vector<ShrinkCheck> shrink;
    Verdict verdict = Verdict::Inconsistent;
    std::string note;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;  // t, direction_id, ks_stat, critical, pass
};

// Verdict rules: degenerate iff V has a collapsed eigenvalue; otherwise
// consistent iff the smallest-t slice passes KS in every direction.
// Degenerate directions are excluded from KS and tested by quantile
// shrinkage across the schedule instead.
CltReport clt_check(const models::ModelSpec& model, const MappingSpec& mapping,
                    std::vector<double> t_schedule, const sim::SimConfig& config,
                    double level = 0.001);

struct FcltMarginal {
    double u = 0.0, tau = 0.0;
    std::size_t direction_id = 0;
    stats::KSReport ks;
};

struct FcltCov {
    double u = 0.0, s = 0.0, t = 0.0;
    std::size_t j = 0, k = 0;
    double empirical = 0.0, target = 0.0, se = 0.0;
    bool pass = false;         // |empirical - target| <= 5 se
};

struct FcltOrth {
    double u = 0.0, s = 0.0, t = 0.0;
    std::size_t j = 0, k = 0;
    double correlation = 0.0, bound = 0.0;
    bool pass = false;         // |corr(Y_s, Y_t - Y_s)| <= 5 / sqrt(n)
};

struct FcltReport {
    std::string mapping;
    GaussianLimit limit;
    std::vector<double> u_schedule;
    std::vector<double> t_grid;          // normalized grid, first entry 0
    std::vector<FcltMarginal> marginals;
    std::vector<FcltCov> covariances;
    std::vector<FcltOrth> orthogonality;
    Verdict verdict = Verdict::Inconsistent;
    std::string note;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

// Scaled-path law check: simulates X on u * t_grid and compares
// Y_tau = (f(X_{u tau}) - f(x0)) / sqrt(u) with Brownian motion of
// covariance V: Gaussian marginals, covariance V*min(s,t), independent
// increments. Verdict comes from the smallest u.
FcltReport fclt_check(const models::ModelSpec& model, const MappingSpec& mapping,
                      std::vector<double> u_schedule, std::vector<double> t_grid,
                      const sim::SimConfig& config, double level = 0.001);

// Large-deviation decay rate of an up-crossing by eps for a scalar diffusion
// with state-dependent volatility: one half of the squared integral of
// 1/sigma between the start and the bumped level. sigma must stay positive
// on the integration range.
double ldp_rate(const std::function<double(double)>& sigma, double x0, double eps,
                double tol = 1e-10);

} // namespace smalltime::clt
