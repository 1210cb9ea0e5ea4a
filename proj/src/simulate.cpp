#include "smalltime/simulate.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "smalltime/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary sample format assumes a little-endian host");

namespace smalltime::sim {

std::string scheme_name(Scheme scheme) {
    return scheme == Scheme::Exact ? "Exact" : "EulerMaruyama";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "Exact") return Scheme::Exact;
    if (name == "EulerMaruyama") return Scheme::EulerMaruyama;
    throw BadInput("unknown scheme: " + name);
}

std::vector<double> MCSample::column(std::size_t col) const {
    std::vector<double> out(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) out[i] = values[i * n_cols + col];
    return out;
}

int resolve_threads(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SMALLTIME_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0 && cap < 4096) n = std::min(n, static_cast<int>(cap));
    }
    return n;
}

rng::Xoshiro256pp substream_rng(std::uint64_t seed, std::uint64_t chunk_index) {
    return rng::substream(seed, chunk_index);
}

double draw_normal(rng::Xoshiro256pp& gen) {
    return stats::normal_quantile(rng::uniform01(gen));
}

// Marsaglia-Tsang squeeze; boosts shape < 1 through the a+1 identity.
double draw_gamma(rng::Xoshiro256pp& gen, double shape) {
    if (!(shape > 0.0)) throw std::domain_error("draw_gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = rng::uniform01(gen);
        return draw_gamma(gen, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = draw_normal(gen);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng::uniform01(gen);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t draw_poisson(rng::Xoshiro256pp& gen, double mean) {
    if (mean < 0.0) throw std::domain_error("draw_poisson: mean must be nonnegative");
    if (mean == 0.0) return 0;
    // Knuth's product method; split large means so exp(-mean) cannot underflow.
    if (mean > 500.0)
        return draw_poisson(gen, mean * 0.5) + draw_poisson(gen, mean - mean * 0.5);
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = rng::uniform01(gen);
    while (prod > limit) {
        ++k;
        prod *= rng::uniform01(gen);
    }
    return k;
}

// ============================================================
// Internal: flattened parameters and per-kind stepping
// ============================================================

namespace {

using models::Kind;

struct Params {
    Kind kind{};
    std::size_t dim = 1;
    bool log = false;
    double b = 0, sigma = 0, r = 0, beta = 1;
    double v0 = 0, kappa = 0, theta = 0, xi = 0, rho = 0;
    double delta = 0, qp = 0, rate = 0;
    models::JumpSpec jump;
    bool has_jumps = false;
    std::vector<double> x0;
};

Params flatten(const models::ModelSpec& spec) {
    Params p;
    p.kind = spec.kind;
    p.dim = spec.dim;
    p.log = spec.log_coords();
    p.x0 = spec.x0;
    switch (spec.kind) {
        case Kind::DriftedBM:
            p.b = spec.param("b");
            p.sigma = spec.param("sigma");
            break;
        case Kind::GBM:
            p.sigma = spec.param("sigma");
            p.r = spec.param("r");
            break;
        case Kind::CEV:
            p.sigma = spec.param("sigma");
            p.beta = spec.param("beta");
            p.r = spec.param_or("r", 0.0);
            break;
        case Kind::Heston:
            p.v0 = spec.param("v0");
            p.kappa = spec.param("kappa");
            p.theta = spec.param("theta");
            p.xi = spec.param("xi");
            p.rho = spec.param("rho");
            p.r = spec.param("r");
            break;
        case Kind::SquaredBessel:
            p.delta = spec.param("delta");
            break;
        case Kind::SquaredBM:
            break;
        case Kind::QuantileDriftBM:
            p.qp = stats::normal_quantile(spec.param("p"));
            break;
        case Kind::PoissonMartingale:
            p.rate = spec.param("rate");
            break;
        case Kind::JumpDiffusion:
            p.b = spec.param("b");
            p.sigma = spec.param("sigma");
            p.jump = *spec.jumps();
            p.has_jumps = true;
            break;
    }
    return p;
}

// Internal integrator state of one path. x carries the natural coordinate
// per kind (log-price for GBM/Heston so positivity is structural, the
// plain state otherwise); v is the Heston variance.
struct PathState {
    double x = 0.0;
    double v = 0.0;
    std::vector<double> xs;  // DriftedBM coordinates when dim > 1
};

void init_state(const Params& p, PathState& st) {
    switch (p.kind) {
        case Kind::GBM:
        case Kind::Heston:
            st.x = std::log(p.x0[0]);
            st.v = p.v0;
            break;
        case Kind::DriftedBM:
            if (p.dim > 1)
                st.xs = p.x0;
            else
                st.x = p.x0[0];
            break;
        default:
            st.x = p.x0[0];
            break;
    }
}

// One Euler substep of size h starting at time t. Jump models add the
// interval's Poisson jumps at the end of the substep.
void euler_step(const Params& p, PathState& st, double t, double h, rng::Xoshiro256pp& gen) {
    const double sqh = std::sqrt(h);
    switch (p.kind) {
        case Kind::DriftedBM: {
            if (p.dim > 1) {
                for (auto& x : st.xs) x += p.b * h + p.sigma * sqh * draw_normal(gen);
            } else {
                st.x += p.b * h + p.sigma * sqh * draw_normal(gen);
            }
            break;
        }
        case Kind::GBM:
            // Stepping the log keeps the state positive; this is Euler on
            // the log coordinate, which is exact per substep for GBM.
            st.x += (p.r - 0.5 * p.sigma * p.sigma) * h + p.sigma * sqh * draw_normal(gen);
            break;
        case Kind::CEV: {
            if (st.x <= 0.0) {
                st.x = 0.0;  // absorbed
                break;
            }
            const double dw = sqh * draw_normal(gen);
            st.x += p.r * st.x * h + p.sigma * std::pow(st.x, p.beta) * dw;
            if (st.x <= 0.0) st.x = 0.0;
            break;
        }
        case Kind::Heston: {
            // Full truncation: the variance enters every coefficient through
            // v+ = max(v,0) while the state itself may run negative.
            const double vp = std::max(st.v, 0.0);
            const double z1 = draw_normal(gen);
            const double z2 = draw_normal(gen);
            const double dw1 = sqh * z1;
            const double dw2 = sqh * (p.rho * z1 + std::sqrt(1.0 - p.rho * p.rho) * z2);
            st.x += (p.r - 0.5 * vp) * h + std::sqrt(vp) * dw1;
            st.v += p.kappa * (p.theta - vp) * h + p.xi * std::sqrt(vp) * dw2;
            break;
        }
        case Kind::SquaredBessel: {
            const double rp = std::max(st.x, 0.0);
            st.x += p.delta * h + 2.0 * std::sqrt(rp) * sqh * draw_normal(gen);
            break;
        }
        case Kind::SquaredBM: {
            const double xp = std::max(st.x, 0.0);
            st.x += h + 2.0 * std::sqrt(xp) * sqh * draw_normal(gen);
            break;
        }
        case Kind::QuantileDriftBM:
            // The drift density blows up like 1/(2 sqrt(t)) but integrates
            // exactly to qp*(sqrt(t+h)-sqrt(t)); using the exact integral
            // keeps the first substep finite.
            st.x += p.qp * (std::sqrt(t + h) - std::sqrt(t)) + sqh * draw_normal(gen);
            break;
        case Kind::PoissonMartingale:
            st.x += h - static_cast<double>(draw_poisson(gen, p.rate * h));
            break;
        case Kind::JumpDiffusion: {
            st.x += p.b * h + p.sigma * sqh * draw_normal(gen);
            const std::uint64_t n = draw_poisson(gen, p.jump.intensity * h);
            for (std::uint64_t k = 0; k < n; ++k) st.x += p.jump.sample(gen);
            break;
        }
    }
}

// Exact increment over [t, t+dt]; defined for the kinds whose transition
// law at the grid times is available in closed form.
void exact_step(const Params& p, PathState& st, double t, double dt, rng::Xoshiro256pp& gen) {
    const double sq = std::sqrt(dt);
    switch (p.kind) {
        case Kind::DriftedBM:
            if (p.dim > 1) {
                for (auto& x : st.xs) x += p.b * dt + p.sigma * sq * draw_normal(gen);
            } else {
                st.x += p.b * dt + p.sigma * sq * draw_normal(gen);
            }
            break;
        case Kind::GBM:
            st.x += (p.r - 0.5 * p.sigma * p.sigma) * dt + p.sigma * sq * draw_normal(gen);
            break;
        case Kind::QuantileDriftBM:
            st.x += p.qp * (std::sqrt(t + dt) - std::sqrt(t)) + sq * draw_normal(gen);
            break;
        case Kind::SquaredBM: {
            // Track the driving Brownian path in v and square it.
            st.v += sq * draw_normal(gen);
            st.x = st.v * st.v;
            break;
        }
        case Kind::PoissonMartingale:
            st.x += dt - static_cast<double>(draw_poisson(gen, p.rate * dt));
            break;
        default:
            throw SchemeUnavailable("exact path sampling is unavailable for " +
                                    models::kind_name(p.kind));
    }
}

// Observable coordinates of the current state.
void observe(const Params& p, const PathState& st, double* out) {
    switch (p.kind) {
        case Kind::GBM:
        case Kind::Heston:
            out[0] = p.log ? st.x : std::exp(st.x);
            break;
        case Kind::DriftedBM:
            if (p.dim > 1) {
                for (std::size_t i = 0; i < p.dim; ++i) out[i] = st.xs[i];
            } else {
                out[0] = st.x;
            }
            break;
        default:
            out[0] = st.x;
            break;
    }
}

// Terminal draw in one shot where the marginal law is known.
void exact_terminal(const Params& p, double t, rng::Xoshiro256pp& gen, double* out) {
    const double sq = std::sqrt(t);
    switch (p.kind) {
        case Kind::DriftedBM:
            for (std::size_t i = 0; i < p.dim; ++i)
                out[i] = p.x0[i] + p.b * t + p.sigma * sq * draw_normal(gen);
            return;
        case Kind::GBM: {
            const double xT = std::log(p.x0[0]) + (p.r - 0.5 * p.sigma * p.sigma) * t +
                              p.sigma * sq * draw_normal(gen);
            out[0] = p.log ? xT : std::exp(xT);
            return;
        }
        case Kind::QuantileDriftBM:
            out[0] = p.x0[0] + p.qp * sq + sq * draw_normal(gen);
            return;
        case Kind::SquaredBM: {
            const double b = sq * draw_normal(gen);
            out[0] = b * b;
            return;
        }
        case Kind::SquaredBessel: {
            // From a zero start the marginal is Gamma(delta/2, scale 2t).
            if (p.x0[0] != 0.0)
                throw SchemeUnavailable("exact squared Bessel sampling needs a zero start");
            out[0] = p.delta == 0.0 ? 0.0 : 2.0 * t * draw_gamma(gen, 0.5 * p.delta);
            return;
        }
        case Kind::PoissonMartingale:
            out[0] = t - static_cast<double>(draw_poisson(gen, p.rate * t));
            return;
        default:
            throw SchemeUnavailable("exact terminal sampling is unavailable for " +
                                    models::kind_name(p.kind));
    }
}

void run_chunks(std::size_t n, std::size_t chunk_size, int threads,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (chunk_size == 0) throw BadInput("chunk_size must be positive");
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            try {
                body(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    const int nw = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n_chunks, 1));
    if (nw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nw));
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

void check_finite(const MCSample& sample) {
    for (std::size_t i = 0; i < sample.values.size(); ++i) {
        if (!std::isfinite(sample.values[i])) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "non-finite value at path %zu column %zu; run aborted",
                          i / sample.n_cols, i % sample.n_cols);
            throw StepUnstable(msg);
        }
    }
}

void validate_grid(const std::vector<double>& t_grid) {
    if (t_grid.size() < 2) throw BadInput("t_grid needs at least two points");
    if (t_grid.front() != 0.0) throw BadInput("t_grid must start at 0");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
        if (!(t_grid[i] < t_grid[i + 1])) throw BadInput("t_grid must increase strictly");
        if (!std::isfinite(t_grid[i + 1])) throw BadInput("t_grid must be finite");
    }
}

double effective_h_max(const SimConfig& config, double t_max) {
    if (config.h_max > 0.0) return config.h_max;
    return 1e-4 * t_max;  // small-time experiments need fine steps near 0
}

nlohmann::json base_meta(const models::ModelSpec& model, const SimConfig& config,
                         const std::vector<double>& t_grid, double h_eff) {
    nlohmann::json meta;
    meta["model"] = model.to_json();
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(model.identity_hash()));
    meta["model_hash"] = hash;
    meta["seed"] = config.seed;
    meta["scheme"] = scheme_name(config.scheme);
    meta["chunk_size"] = config.chunk_size;
    meta["h_max_effective"] = h_eff;
    meta["t_grid"] = t_grid;
    return meta;
}

std::string format_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", t);
    return buf;
}

} // namespace

// ============================================================
// Public entry points
// ============================================================

MCSample simulate_terminal(const models::ModelSpec& model, double t, const SimConfig& config) {
    if (!(t > 0.0) || !std::isfinite(t)) throw BadInput("simulate_terminal: t must be positive");
    if (config.n_paths == 0) throw BadInput("n_paths must be positive");
    models::validate(model);

    const Params p = flatten(model);
    const double h_eff = effective_h_max(config, t);
    const bool exact = config.scheme == Scheme::Exact;

    if (exact) {
        switch (p.kind) {
            case Kind::CEV:
            case Kind::Heston:
            case Kind::JumpDiffusion:
                throw SchemeUnavailable("no exact sampler for " + models::kind_name(p.kind));
            default:
                break;
        }
        // Surface start-point restrictions before any thread spawns.
        if (p.kind == Kind::SquaredBessel && p.x0[0] != 0.0)
            throw SchemeUnavailable("exact squared Bessel sampling needs a zero start");
    }

    MCSample sample;
    sample.n_paths = config.n_paths;
    sample.n_cols = p.dim;
    sample.values.resize(sample.n_paths * sample.n_cols);
    for (std::size_t j = 0; j < p.dim; ++j)
        sample.col_labels.push_back("x" + std::to_string(j + 1));
    sample.meta = base_meta(model, config, {0.0, t}, exact ? 0.0 : h_eff);

    // Constant coefficients with compound Poisson jumps make a single Euler
    // interval exact in law for the terminal value, so the jump model skips
    // substepping; every diffusive kind honors the substep cap.
    const bool single_interval = p.kind == Kind::JumpDiffusion ||
                                 p.kind == Kind::PoissonMartingale;
    const std::size_t n_sub =
        exact || single_interval
            ? 1
            : static_cast<std::size_t>(std::max(1.0, std::ceil(t / h_eff)));

    run_chunks(config.n_paths, config.chunk_size, resolve_threads(config.threads),
               [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                   rng::Xoshiro256pp gen = substream_rng(config.seed, chunk);
                   for (std::size_t row = begin; row < end; ++row) {
                       double* out = sample.values.data() + row * sample.n_cols;
                       if (exact) {
                           exact_terminal(p, t, gen, out);
                       } else {
                           PathState st;
                           init_state(p, st);
                           const double h = t / static_cast<double>(n_sub);
                           for (std::size_t k = 0; k < n_sub; ++k)
                               euler_step(p, st, static_cast<double>(k) * h, h, gen);
                           observe(p, st, out);
                       }
                   }
               });

    check_finite(sample);
    return sample;
}

MCSample simulate_paths(const models::ModelSpec& model, const SimConfig& config) {
    validate_grid(config.t_grid);
    if (config.n_paths == 0) throw BadInput("n_paths must be positive");
    models::validate(model);

    const Params p = flatten(model);
    const std::vector<double>& grid = config.t_grid;
    const double h_eff = effective_h_max(config, grid.back());
    const bool exact = config.scheme == Scheme::Exact;

    if (exact) {
        switch (p.kind) {
            case Kind::CEV:
            case Kind::Heston:
            case Kind::JumpDiffusion:
            case Kind::SquaredBessel:
                throw SchemeUnavailable("no exact path sampler for " + models::kind_name(p.kind));
            default:
                break;
        }
    }

    MCSample sample;
    sample.n_paths = config.n_paths;
    sample.n_cols = grid.size() * p.dim;
    sample.values.resize(sample.n_paths * sample.n_cols);
    for (const double tg : grid)
        for (std::size_t j = 0; j < p.dim; ++j)
            sample.col_labels.push_back("x" + std::to_string(j + 1) + "@t=" + format_time(tg));
    sample.meta = base_meta(model, config, grid, exact ? 0.0 : h_eff);

    const std::vector<double> start = model.observable_start();
    // Jump kinds are transition-exact per grid interval; see simulate_terminal.
    const bool single_interval = p.kind == Kind::JumpDiffusion ||
                                 p.kind == Kind::PoissonMartingale;

    run_chunks(config.n_paths, config.chunk_size, resolve_threads(config.threads),
               [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                   rng::Xoshiro256pp gen = substream_rng(config.seed, chunk);
                   for (std::size_t row = begin; row < end; ++row) {
                       double* out = sample.values.data() + row * sample.n_cols;
                       PathState st;
                       init_state(p, st);
                       for (std::size_t j = 0; j < p.dim; ++j) out[j] = start[j];
                       for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
                           const double t0 = grid[g];
                           const double dt = grid[g + 1] - grid[g];
                           if (exact) {
                               exact_step(p, st, t0, dt, gen);
                           } else if (single_interval) {
                               euler_step(p, st, t0, dt, gen);
                           } else {
                               const auto n_sub = static_cast<std::size_t>(
                                   std::max(1.0, std::ceil(dt / h_eff)));
                               const double h = dt / static_cast<double>(n_sub);
                               for (std::size_t k = 0; k < n_sub; ++k)
                                   euler_step(p, st, t0 + static_cast<double>(k) * h, h, gen);
                           }
                           observe(p, st, out + (g + 1) * p.dim);
                       }
                   }
               });

    check_finite(sample);
    return sample;
}

stats::ProbEstimate prob_exceed(const MCSample& sample, std::size_t column, double level,
                                double confidence) {
    if (column >= sample.n_cols) throw BadInput("prob_exceed: column out of range");
    const std::vector<double> col = sample.column(column);
    return stats::prob_exceed_count(col.data(), col.data() + col.size(), level, confidence);
}

// ============================================================
// Export
// ============================================================

void write_csv(const MCSample& sample, std::ostream& out) {
    for (std::size_t j = 0; j < sample.n_cols; ++j) {
        if (j) out << ',';
        out << sample.col_labels[j];
    }
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < sample.n_paths; ++i) {
        for (std::size_t j = 0; j < sample.n_cols; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", sample.at(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

void write_csv_file(const MCSample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot open for writing: " + path);
    write_csv(sample, out);
}

namespace {
constexpr char kMagic[8] = {'S', 'T', 'M', 'C', 'F', '6', '4', '\n'};
}

void write_binary(const MCSample& sample, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw BadInput("cannot open for writing: " + path);
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(sample.values.data()),
              static_cast<std::streamsize>(sample.values.size() * sizeof(double)));
    if (!out) throw BadInput("short write: " + path);

    nlohmann::json side = sample.meta;
    side["n_paths"] = sample.n_paths;
    side["n_cols"] = sample.n_cols;
    side["col_labels"] = sample.col_labels;
    std::ofstream meta(path + ".meta.json");
    if (!meta) throw BadInput("cannot open for writing: " + path + ".meta.json");
    meta << side.dump(2) << '\n';
}

MCSample read_binary(const std::string& path) {
    std::ifstream meta_in(path + ".meta.json");
    if (!meta_in) throw BadInput("missing sidecar: " + path + ".meta.json");
    nlohmann::json side;
    meta_in >> side;

    MCSample sample;
    sample.n_paths = side.at("n_paths").get<std::size_t>();
    sample.n_cols = side.at("n_cols").get<std::size_t>();
    sample.col_labels = side.at("col_labels").get<std::vector<std::string>>();
    side.erase("n_paths");
    side.erase("n_cols");
    side.erase("col_labels");
    sample.meta = side;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw BadInput("bad magic in " + path);
    sample.values.resize(sample.n_paths * sample.n_cols);
    in.read(reinterpret_cast<char*>(sample.values.data()),
            static_cast<std::streamsize>(sample.values.size() * sizeof(double)));
    if (!in) throw BadInput("truncated payload in " + path);
    return sample;
}

} // namespace smalltime::sim
