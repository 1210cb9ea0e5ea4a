#include "smalltime/clt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "smalltime/errors.hpp"
#include "smalltime/quadrature.hpp"
#include "smalltime/rng.hpp"

namespace smalltime::clt {

namespace {

// Seed for the shared batch of extra projection directions. Fixed so the
// direction set is part of the check's definition, not of its randomness.
constexpr std::uint64_t kDirectionSeed = 0xC0FFEEull;
constexpr std::size_t kExtraDirections = 8;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Axes first, then a seeded batch of isotropic unit vectors shared by every
// check run. One dimension needs no extras: every direction is the axis.
std::vector<std::vector<double>> direction_set(std::size_t m) {
    std::vector<std::vector<double>> dirs;
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> e(m, 0.0);
        e[j] = 1.0;
        dirs.push_back(std::move(e));
    }
    if (m >= 2) {
        rng::Xoshiro256pp gen(kDirectionSeed);
        for (std::size_t k = 0; k < kExtraDirections; ++k) {
            std::vector<double> d(m);
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    d[j] = stats::normal_quantile(rng::uniform01(gen));
                    norm2 += d[j] * d[j];
                }
            } while (norm2 < 1e-12);
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : d) x *= inv;
            dirs.push_back(std::move(d));
        }
    }
    return dirs;
}

// Order statistic at probability q of the absolute values.
double abs_quantile(std::vector<double> v, double q) {
    for (double& x : v) x = std::fabs(x);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    return v[idx - 1];
}

void check_mapping(const MappingSpec& mapping) {
    if (!mapping.f || !mapping.jacobian)
        throw BadInput("mapping needs both f and jacobian");
    if (mapping.in_dim == 0 || mapping.out_dim == 0)
        throw BadInput("mapping dimensions must be positive");
}

std::vector<double> apply_mapping(const MappingSpec& mapping, const std::vector<double>& x) {
    if (mapping.in_domain && !mapping.in_domain(x))
        throw MappingDomain("state left the domain of mapping '" + mapping.name + "'");
    std::vector<double> y = mapping.f(x);
    if (y.size() != mapping.out_dim)
        throw BadInput("mapping '" + mapping.name + "' returned the wrong dimension");
    return y;
}

const char* csv_bool(bool b) { return b ? "1" : "0"; }

void csv_number(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out << buf;
}

} // namespace

MappingSpec identity_map(std::size_t m) {
    MappingSpec s;
    s.name = "identity";
    s.in_dim = s.out_dim = m;
    s.f = [](const std::vector<double>& x) { return x; };
    s.jacobian = [m](const std::vector<double>&) { return la::Matrix::identity(m); };
    return s;
}

MappingSpec log_map(std::size_t m) {
    MappingSpec s;
    s.name = "log";
    s.in_dim = s.out_dim = m;
    s.f = [](const std::vector<double>& x) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::log(x[i]);
        return y;
    };
    s.jacobian = [m](const std::vector<double>& x) {
        la::Matrix j(m, m);
        for (std::size_t i = 0; i < m; ++i) j(i, i) = 1.0 / x[i];
        return j;
    };
    s.in_domain = [](const std::vector<double>& x) {
        for (double v : x)
            if (!(v > 0.0)) return false;
        return true;
    };
    return s;
}

MappingSpec square_map(std::size_t m) {
    MappingSpec s;
    s.name = "square";
    s.in_dim = s.out_dim = m;
    s.f = [](const std::vector<double>& x) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
        return y;
    };
    s.jacobian = [m](const std::vector<double>& x) {
        la::Matrix j(m, m);
        for (std::size_t i = 0; i < m; ++i) j(i, i) = 2.0 * x[i];
        return j;
    };
    return s;
}

MappingSpec linear_map(const la::Matrix& a) {
    MappingSpec s;
    s.name = "linear";
    s.in_dim = a.cols();
    s.out_dim = a.rows();
    s.f = [a](const std::vector<double>& x) { return la::mat_vec(a, x); };
    s.jacobian = [a](const std::vector<double>&) { return a; };
    return s;
}

MappingSpec mapping_from_name(const std::string& name, std::size_t m) {
    if (name == "identity") return identity_map(m);
    if (name == "log") return log_map(m);
    if (name == "square") return square_map(m);
    throw BadInput("unknown mapping '" + name + "' (identity, log, square)");
}

la::Matrix fd_jacobian(const MappingSpec& mapping, const std::vector<double>& x0,
                       double rel_step) {
    check_mapping(mapping);
    if (x0.size() != mapping.in_dim) throw BadInput("fd_jacobian: x0 has the wrong dimension");
    la::Matrix j(mapping.out_dim, mapping.in_dim);
    for (std::size_t c = 0; c < mapping.in_dim; ++c) {
        const double h = rel_step * std::max(1.0, std::fabs(x0[c]));
        std::vector<double> xp = x0, xm = x0;
        xp[c] += h;
        xm[c] -= h;
        const std::vector<double> fp = apply_mapping(mapping, xp);
        const std::vector<double> fm = apply_mapping(mapping, xm);
        for (std::size_t r = 0; r < mapping.out_dim; ++r)
            j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
    }
    return j;
}

GaussianLimit limit_covariance(const MappingSpec& mapping, const la::Matrix& L,
                               const std::vector<double>& x0) {
    check_mapping(mapping);
    if (L.rows() != mapping.in_dim)
        throw BadInput("limit_covariance: diffusion matrix rows must match mapping input");
    const la::Matrix dfl = mapping.jacobian(x0) * L;
    GaussianLimit lim;
    lim.L = L;
    lim.V = la::symmetrized(dfl * dfl.transposed());
    const std::vector<double> eig = la::symmetric_eigenvalues(lim.V);
    lim.lambda_min = eig.front();
    lim.lambda_max = eig.back();
    if (lim.lambda_min < -kDegenerateTol * std::max(1.0, lim.lambda_max))
        throw BadInput("limit covariance is not positive semidefinite");
    lim.degenerate = lim.lambda_min <= kDegenerateTol * std::max(lim.lambda_max, 0.0);
    return lim;
}

sim::MCSample normalized_increments(const models::ModelSpec& model, const MappingSpec& mapping,
                                    double t, const sim::SimConfig& config) {
    check_mapping(mapping);
    const std::vector<double> x0 = model.observable_start();
    if (x0.size() != mapping.in_dim)
        throw BadInput("mapping input dimension does not match the model observable");
    const std::vector<double> f0 = apply_mapping(mapping, x0);
    const sim::MCSample raw = sim::simulate_terminal(model, t, config);

    sim::MCSample out;
    out.n_paths = raw.n_paths;
    out.n_cols = mapping.out_dim;
    out.values.resize(out.n_paths * out.n_cols);
    const double scale = 1.0 / std::sqrt(t);
    std::vector<double> x(mapping.in_dim);
    for (std::size_t i = 0; i < raw.n_paths; ++i) {
        for (std::size_t j = 0; j < mapping.in_dim; ++j) x[j] = raw.at(i, j);
        const std::vector<double> y = apply_mapping(mapping, x);
        for (std::size_t j = 0; j < mapping.out_dim; ++j)
            out.values[i * out.n_cols + j] = (y[j] - f0[j]) * scale;
    }
    for (std::size_t j = 0; j < mapping.out_dim; ++j)
        out.col_labels.push_back("y" + std::to_string(j + 1));
    out.meta = raw.meta;
    out.meta["mapping"] = mapping.name;
    out.meta["t"] = t;
    out.meta["normalization"] = "sqrt(t)";
    return out;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Inconsistent: return "inconsistent";
        case Verdict::Degenerate: return "degenerate";
    }
    return "unknown";
}

CltReport clt_check(const models::ModelSpec& model, const MappingSpec& mapping,
                    std::vector<double> t_schedule, const sim::SimConfig& config,
                    double level) {
    check_mapping(mapping);
    if (t_schedule.empty()) throw BadInput("clt_check: empty t schedule");
    for (double t : t_schedule)
        if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("clt_check: t values must be positive");

    CltReport rep;
    rep.mapping = mapping.name;
    rep.t_schedule = t_schedule;

    const la::Matrix L = models::small_time_matrix(model);
    const std::vector<double> x0 = model.observable_start();
    rep.limit = limit_covariance(mapping, L, x0);

    const std::vector<std::vector<double>> dirs = direction_set(mapping.out_dim);
    const double deg_floor = kDegenerateTol * std::max(rep.limit.lambda_max, 0.0);
    std::vector<double> dir_var(dirs.size());
    std::vector<bool> dir_deg(dirs.size());
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        dir_var[d] = dot(dirs[d], la::mat_vec(rep.limit.V, dirs[d]));
        dir_deg[d] = dir_var[d] <= deg_floor;
    }

    const std::size_t idx_small = static_cast<std::size_t>(
        std::min_element(t_schedule.begin(), t_schedule.end()) - t_schedule.begin());
    const std::size_t idx_large = static_cast<std::size_t>(
        std::max_element(t_schedule.begin(), t_schedule.end()) - t_schedule.begin());

    for (std::size_t i = 0; i < t_schedule.size(); ++i) {
        sim::SimConfig cfg = config;
        cfg.seed = rng::derive_seed(config.seed, i);
        const sim::MCSample sample = normalized_increments(model, mapping, t_schedule[i], cfg);

        CltSlice slice;
        slice.t = t_schedule[i];
        slice.all_pass = true;
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            DirectionResult res;
            res.direction_id = d;
            res.direction = dirs[d];
            res.variance = dir_var[d];
            res.degenerate = dir_deg[d];
            std::vector<double> proj(sample.n_paths);
            for (std::size_t p = 0; p < sample.n_paths; ++p) {
                double s = 0.0;
                for (std::size_t j = 0; j < sample.n_cols; ++j)
                    s += sample.at(p, j) * dirs[d][j];
                proj[p] = s;
            }
            if (!res.degenerate) {
                const double sd = std::sqrt(res.variance);
                res.ks = stats::ks_one_sample(
                    std::move(proj), [sd](double x) { return stats::normal_cdf(x / sd); },
                    level);
                slice.all_pass = slice.all_pass && res.ks.pass;
            } else {
                res.q99 = abs_quantile(std::move(proj), 0.99);
            }
            slice.directions.push_back(std::move(res));
        }
        rep.slices.push_back(std::move(slice));
    }

    for (std::size_t d = 0; d < dirs.size(); ++d) {
        if (!dir_deg[d]) continue;
        ShrinkCheck chk;
        chk.direction_id = d;
        chk.q99_smallest_t = rep.slices[idx_small].directions[d].q99;
        chk.q99_largest_t = rep.slices[idx_large].directions[d].q99;
        if (idx_small == idx_large)
            chk.pass = true;
        else if (chk.q99_largest_t == 0.0)
            chk.pass = chk.q99_smallest_t <= 1e-12;
        else
            chk.pass = chk.q99_smallest_t <= 0.25 * chk.q99_largest_t;
        rep.shrink.push_back(chk);
    }

    if (rep.limit.degenerate) {
        rep.verdict = Verdict::Degenerate;
        bool shrink_ok = true;
        for (const ShrinkCheck& c : rep.shrink) shrink_ok = shrink_ok && c.pass;
        rep.note = shrink_ok ? "collapsed directions shrink along the schedule"
                             : "collapsed directions fail to shrink along the schedule";
    } else if (rep.slices[idx_small].all_pass) {
        rep.verdict = Verdict::Consistent;
        rep.note = "all directions pass KS at the smallest t";
    } else {
        rep.verdict = Verdict::Inconsistent;
        rep.note = "KS rejection at the smallest t";
    }
    return rep;
}

nlohmann::json CltReport::to_json() const {
    nlohmann::json j;
    j["mapping"] = mapping;
    j["verdict"] = verdict_name(verdict);
    j["note"] = note;
    j["t_schedule"] = t_schedule;
    j["limit"] = nlohmann::json{{"lambda_min", limit.lambda_min},
                  {"lambda_max", limit.lambda_max},
                  {"degenerate", limit.degenerate},
                  {"V", limit.V.data()}};
    nlohmann::json slices_j = nlohmann::json::array();
    for (const CltSlice& s : slices) {
        nlohmann::json sj;
        sj["t"] = s.t;
        sj["all_pass"] = s.all_pass;
        nlohmann::json dirs_j = nlohmann::json::array();
        for (const DirectionResult& d : s.directions) {
            nlohmann::json dj;
            dj["direction_id"] = d.direction_id;
            dj["direction"] = d.direction;
            dj["variance"] = d.variance;
            dj["degenerate"] = d.degenerate;
            if (d.degenerate) {
                dj["q99_abs"] = d.q99;
            } else {
                dj["ks_stat"] = d.ks.statistic;
                dj["critical"] = d.ks.critical;
                dj["pass"] = d.ks.pass;
            }
            dirs_j.push_back(std::move(dj));
        }
        sj["directions"] = std::move(dirs_j);
        slices_j.push_back(std::move(sj));
    }
    j["slices"] = std::move(slices_j);
    nlohmann::json shrink_j = nlohmann::json::array();
    for (const ShrinkCheck& c : shrink)
        shrink_j.push_back({{"direction_id", c.direction_id},
                            {"q99_smallest_t", c.q99_smallest_t},
                            {"q99_largest_t", c.q99_largest_t},
                            {"pass", c.pass}});
    j["shrink_checks"] = std::move(shrink_j);
    return j;
}

void CltReport::write_csv(std::ostream& out) const {
    out << "t,direction_id,ks_stat,critical,pass\n";
    for (const CltSlice& s : slices) {
        for (const DirectionResult& d : s.directions) {
            csv_number(out, s.t);
            out << ',' << d.direction_id << ',';
            if (d.degenerate) {
                bool pass = true;
                for (const ShrinkCheck& c : shrink)
                    if (c.direction_id == d.direction_id) pass = c.pass;
                out << ",," << csv_bool(pass) << '\n';
            } else {
                csv_number(out, d.ks.statistic);
                out << ',';
                csv_number(out, d.ks.critical);
                out << ',' << csv_bool(d.ks.pass) << '\n';
            }
        }
    }
}

FcltReport fclt_check(const models::ModelSpec& model, const MappingSpec& mapping,
                      std::vector<double> u_schedule, std::vector<double> t_grid,
                      const sim::SimConfig& config, double level) {
    check_mapping(mapping);
    if (u_schedule.empty()) throw BadInput("fclt_check: empty u schedule");
    for (double u : u_schedule)
        if (!(u > 0.0) || !std::isfinite(u)) throw BadInput("fclt_check: u values must be positive");
    if (t_grid.size() < 2 || t_grid.front() != 0.0)
        throw BadInput("fclt_check: normalized grid must start at 0 with at least two points");
    for (std::size_t g = 1; g < t_grid.size(); ++g)
        if (!(t_grid[g] > t_grid[g - 1])) throw BadInput("fclt_check: grid must increase");

    FcltReport rep;
    rep.mapping = mapping.name;
    rep.u_schedule = u_schedule;
    rep.t_grid = t_grid;

    const la::Matrix L = models::small_time_matrix(model);
    const std::vector<double> x0 = model.observable_start();
    rep.limit = limit_covariance(mapping, L, x0);
    const std::vector<double> f0 = apply_mapping(mapping, x0);

    const std::size_t m = mapping.out_dim;
    const std::vector<std::vector<double>> dirs = direction_set(m);
    const double deg_floor = kDegenerateTol * std::max(rep.limit.lambda_max, 0.0);
    std::vector<double> dir_var(dirs.size());
    std::vector<bool> dir_deg(dirs.size());
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        dir_var[d] = dot(dirs[d], la::mat_vec(rep.limit.V, dirs[d]));
        dir_deg[d] = dir_var[d] <= deg_floor;
    }

    const std::size_t idx_small = static_cast<std::size_t>(
        std::min_element(u_schedule.begin(), u_schedule.end()) - u_schedule.begin());
    bool smallest_pass = true;
    bool any_checked = false;

    for (std::size_t ui = 0; ui < u_schedule.size(); ++ui) {
        const double u = u_schedule[ui];
        sim::SimConfig cfg = config;
        cfg.seed = rng::derive_seed(config.seed, ui);
        cfg.t_grid.clear();
        for (double tau : t_grid) cfg.t_grid.push_back(u * tau);
        const sim::MCSample paths = sim::simulate_paths(model, cfg);

        const std::size_t n = paths.n_paths;
        const std::size_t n_pts = t_grid.size() - 1;
        // Y[g][j], g indexing the nonzero grid points, already normalized by sqrt(u).
        std::vector<std::vector<std::vector<double>>> y(
            n_pts, std::vector<std::vector<double>>(m, std::vector<double>(n)));
        const double scale = 1.0 / std::sqrt(u);
        std::vector<double> x(mapping.in_dim);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t g = 0; g < n_pts; ++g) {
                for (std::size_t j = 0; j < mapping.in_dim; ++j)
                    x[j] = paths.at(p, (g + 1) * mapping.in_dim + j);
                const std::vector<double> fy = apply_mapping(mapping, x);
                for (std::size_t j = 0; j < m; ++j) y[g][j][p] = (fy[j] - f0[j]) * scale;
            }
        }

        bool u_pass = true;
        for (std::size_t g = 0; g < n_pts; ++g) {
            const double tau = t_grid[g + 1];
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                if (dir_deg[d]) continue;
                std::vector<double> proj(n, 0.0);
                for (std::size_t j = 0; j < m; ++j) {
                    const double w = dirs[d][j];
                    if (w == 0.0) continue;
                    for (std::size_t p = 0; p < n; ++p) proj[p] += w * y[g][j][p];
                }
                const double sd = std::sqrt(tau * dir_var[d]);
                FcltMarginal mar;
                mar.u = u;
                mar.tau = tau;
                mar.direction_id = d;
                mar.ks = stats::ks_one_sample(
                    std::move(proj), [sd](double v) { return stats::normal_cdf(v / sd); },
                    level);
                u_pass = u_pass && mar.ks.pass;
                rep.marginals.push_back(std::move(mar));
            }
        }

        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t g1 = 0; g1 < n_pts; ++g1) {
            for (std::size_t g2 = g1; g2 < n_pts; ++g2) {
                for (std::size_t j = 0; j < m; ++j) {
                    for (std::size_t k = 0; k < m; ++k) {
                        if (g1 == g2 && k < j) continue;
                        const std::vector<double>& a = y[g1][j];
                        const std::vector<double>& b = y[g2][k];
                        const double ma = mean_of(a), mb = mean_of(b);
                        double cov = 0.0, var_prod = 0.0;
                        for (std::size_t p = 0; p < n; ++p) {
                            const double w = (a[p] - ma) * (b[p] - mb);
                            cov += w;
                            var_prod += w * w;
                        }
                        cov *= inv_n;
                        var_prod = var_prod * inv_n - cov * cov;
                        FcltCov cv;
                        cv.u = u;
                        cv.s = t_grid[g1 + 1];
                        cv.t = t_grid[g2 + 1];
                        cv.j = j;
                        cv.k = k;
                        cv.empirical = cov;
                        cv.target = rep.limit.V(j, k) * std::min(cv.s, cv.t);
                        cv.se = std::sqrt(std::max(var_prod, 0.0) * inv_n);
                        cv.pass = std::fabs(cv.empirical - cv.target) <= 5.0 * cv.se + 1e-12;
                        u_pass = u_pass && cv.pass;
                        rep.covariances.push_back(cv);
                    }
                }
            }
        }

        for (std::size_t g1 = 0; g1 < n_pts; ++g1) {
            for (std::size_t g2 = g1 + 1; g2 < n_pts; ++g2) {
                for (std::size_t j = 0; j < m; ++j) {
                    for (std::size_t k = 0; k < m; ++k) {
                        const std::vector<double>& a = y[g1][j];
                        double mb = 0.0;
                        std::vector<double> b(n);
                        for (std::size_t p = 0; p < n; ++p) {
                            b[p] = y[g2][k][p] - y[g1][k][p];
                            mb += b[p];
                        }
                        mb *= inv_n;
                        const double ma = mean_of(a);
                        double cov = 0.0, va = 0.0, vb = 0.0;
                        for (std::size_t p = 0; p < n; ++p) {
                            cov += (a[p] - ma) * (b[p] - mb);
                            va += (a[p] - ma) * (a[p] - ma);
                            vb += (b[p] - mb) * (b[p] - mb);
                        }
                        FcltOrth orth;
                        orth.u = u;
                        orth.s = t_grid[g1 + 1];
                        orth.t = t_grid[g2 + 1];
                        orth.j = j;
                        orth.k = k;
                        orth.correlation = (va > 0.0 && vb > 0.0)
                                               ? cov / std::sqrt(va * vb)
                                               : 0.0;
                        orth.bound = 5.0 / std::sqrt(static_cast<double>(n));
                        orth.pass = std::fabs(orth.correlation) <= orth.bound;
                        u_pass = u_pass && orth.pass;
                        rep.orthogonality.push_back(orth);
                    }
                }
            }
        }

        if (ui == idx_small) {
            smallest_pass = u_pass;
            any_checked = true;
        }
    }

    if (rep.limit.degenerate) {
        rep.verdict = Verdict::Degenerate;
        rep.note = "limit covariance has a collapsed direction";
    } else if (any_checked && smallest_pass) {
        rep.verdict = Verdict::Consistent;
        rep.note = "marginals, covariance, and increment orthogonality pass at the smallest u";
    } else {
        rep.verdict = Verdict::Inconsistent;
        rep.note = "scaled path law deviates from the Gaussian limit at the smallest u";
    }
    return rep;
}

nlohmann::json FcltReport::to_json() const {
    nlohmann::json j;
    j["mapping"] = mapping;
    j["verdict"] = verdict_name(verdict);
    j["note"] = note;
    j["u_schedule"] = u_schedule;
    j["t_grid"] = t_grid;
    j["limit"] = nlohmann::json{{"lambda_min", limit.lambda_min},
                  {"lambda_max", limit.lambda_max},
                  {"degenerate", limit.degenerate},
                  {"V", limit.V.data()}};
    nlohmann::json mj = nlohmann::json::array();
    for (const FcltMarginal& x : marginals)
        mj.push_back({{"u", x.u},
                      {"tau", x.tau},
                      {"direction_id", x.direction_id},
                      {"ks_stat", x.ks.statistic},
                      {"critical", x.ks.critical},
                      {"pass", x.ks.pass}});
    j["marginals"] = std::move(mj);
    nlohmann::json cj = nlohmann::json::array();
    for (const FcltCov& x : covariances)
        cj.push_back({{"u", x.u}, {"s", x.s}, {"t", x.t}, {"j", x.j}, {"k", x.k},
                      {"empirical", x.empirical}, {"target", x.target}, {"se", x.se},
                      {"pass", x.pass}});
    j["covariances"] = std::move(cj);
    nlohmann::json oj = nlohmann::json::array();
    for (const FcltOrth& x : orthogonality)
        oj.push_back({{"u", x.u}, {"s", x.s}, {"t", x.t}, {"j", x.j}, {"k", x.k},
                      {"correlation", x.correlation}, {"bound", x.bound}, {"pass", x.pass}});
    j["orthogonality"] = std::move(oj);
    return j;
}

void FcltReport::write_csv(std::ostream& out) const {
    out << "check,u,s,t,j,k,statistic,target,bound,pass\n";
    for (const FcltMarginal& x : marginals) {
        out << "marginal,";
        csv_number(out, x.u);
        out << ',';
        csv_number(out, x.tau);
        out << ',';
        csv_number(out, x.tau);
        out << ',' << x.direction_id << ',' << x.direction_id << ',';
        csv_number(out, x.ks.statistic);
        out << ",0,";
        csv_number(out, x.ks.critical);
        out << ',' << csv_bool(x.ks.pass) << '\n';
    }
    for (const FcltCov& x : covariances) {
        out << "covariance,";
        csv_number(out, x.u);
        out << ',';
        csv_number(out, x.s);
        out << ',';
        csv_number(out, x.t);
        out << ',' << x.j << ',' << x.k << ',';
        csv_number(out, x.empirical);
        out << ',';
        csv_number(out, x.target);
        out << ',';
        csv_number(out, 5.0 * x.se);
        out << ',' << csv_bool(x.pass) << '\n';
    }
    for (const FcltOrth& x : orthogonality) {
        out << "orthogonality,";
        csv_number(out, x.u);
        out << ',';
        csv_number(out, x.s);
        out << ',';
        csv_number(out, x.t);
        out << ',' << x.j << ',' << x.k << ',';
        csv_number(out, x.correlation);
        out << ",0,";
        csv_number(out, x.bound);
        out << ',' << csv_bool(x.pass) << '\n';
    }
}

double ldp_rate(const std::function<double(double)>& sigma, double x0, double eps,
                double tol) {
    if (!sigma) throw BadInput("ldp_rate: missing volatility function");
    if (!std::isfinite(x0) || !std::isfinite(eps)) throw BadInput("ldp_rate: non-finite input");
    if (eps == 0.0) return 0.0;
    const double lo = std::min(x0, x0 + eps);
    const double hi = std::max(x0, x0 + eps);
    const auto integrand = [&sigma](double u) {
        const double s = sigma(u);
        if (!(s > 0.0) || !std::isfinite(s))
            throw MappingDomain("ldp_rate: volatility must be positive on the range");
        return 1.0 / s;
    };
    const quad::Result r = quad::adaptive_simpson(integrand, lo, hi, tol);
    return 0.5 * r.value * r.value;
}

} // namespace smalltime::clt
