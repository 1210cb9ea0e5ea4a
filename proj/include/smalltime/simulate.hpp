#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "smalltime/models.hpp"
#include "smalltime/rng.hpp"
#include "smalltime/stats.hpp"

// Monte Carlo engine. Work is split into chunks of consecutive paths; chunk
// k draws from substream_rng(seed, k) regardless of which worker runs it and
// in which order, so results are a pure function of (model, config) and in
// particular independent of the thread count.

namespace smalltime::sim {

enum class Scheme { EulerMaruyama, Exact };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct SimConfig {
    std::size_t n_paths = 10000;
    std::vector<double> t_grid;      // starts at 0, strictly increasing
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::EulerMaruyama;
    std::size_t chunk_size = 8192;
    double h_max = 0.0;              // Euler substep cap; 0 selects 1e-4 * max(t_grid)
    int threads = 0;                 // 0: SMALLTIME_THREADS env, then hardware
};

struct MCSample {
    std::size_t n_paths = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;      // row-major, n_paths x n_cols, always finite
    std::vector<std::string> col_labels;
    nlohmann::json meta;

    double at(std::size_t row, std::size_t col) const { return values[row * n_cols + col]; }
    std::vector<double> column(std::size_t col) const;
};

// Effective worker count: explicit request, else hardware, both capped by
// the SMALLTIME_THREADS environment variable when it is set.
int resolve_threads(int requested);

rng::Xoshiro256pp substream_rng(std::uint64_t seed, std::uint64_t chunk_index);

// Distribution draws used by the samplers; all reduce to uniform bits from
// the substream engine, never to libstdc++ distributions, so the stream of
// values is stable across standard libraries.
double draw_normal(rng::Xoshiro256pp& gen);
double draw_gamma(rng::Xoshiro256pp& gen, double shape);          // scale 1
std::uint64_t draw_poisson(rng::Xoshiro256pp& gen, double mean);

// Law of the observable state at a single time t > 0.
MCSample simulate_terminal(const models::ModelSpec& model, double t, const SimConfig& config);

// Observable state along config.t_grid; one Brownian increment per substep
// drives all coordinates of a path, and jump models superpose a Poisson
// count with symmetric sizes per step.
MCSample simulate_paths(const models::ModelSpec& model, const SimConfig& config);

stats::ProbEstimate prob_exceed(const MCSample& sample, std::size_t column, double level,
                                double confidence = 0.99);

// CSV: one header row of column labels, one row per path.
void write_csv(const MCSample& sample, std::ostream& out);
void write_csv_file(const MCSample& sample, const std::string& path);

// Binary: 8-byte magic "STMCF64\n" then row-major little-endian float64;
// shape, labels and meta go to the "<path>.meta.json" sidecar.
void write_binary(const MCSample& sample, const std::string& path);
MCSample read_binary(const std::string& path);

} // namespace smalltime::sim
