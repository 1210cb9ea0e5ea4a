#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smalltime/errors.hpp"
#include "smalltime/linalg.hpp"
#include "smalltime/rng.hpp"

// Model catalog. A ModelSpec is a validated value object: kind, named real
// parameters, initial state, observable dimension. The observable process is
// what simulation returns and what mappings act on; Heston carries its
// variance as internal simulation state and exposes only the price (or
// log-price) coordinate.

namespace smalltime::models {

enum class Kind {
    DriftedBM,        // dX = b dt + sigma dB, any dim (scalar b, sigma per coordinate)
    GBM,              // dS = r S dt + sigma S dB; params sigma, r, optional log flag
    CEV,              // dS = r S dt + sigma max(S,0)^beta dB, absorbed at 0
    Heston,           // dS = r S dt + sqrt(v) S dW1; dv = kappa(theta-v) dt + xi sqrt(v) dW2
    SquaredBessel,    // dR = delta dt + 2 sqrt(R) dB, started at 0
    SquaredBM,        // X = B^2 from 0: dX = dt + 2 sqrt(X) dB
    QuantileDriftBM,  // X_t = B_t + Phi^{-1}(p) sqrt(t); drift blows up like 1/(2 sqrt(t))
    PoissonMartingale,// X_t = t - N_t, unit-size jumps with the given rate
    JumpDiffusion,    // dX = b dt + sigma dB + symmetric compound Poisson jumps
};

std::string kind_name(Kind kind);
Kind kind_from_name(const std::string& name);

enum class JumpLaw { TwoPoint, CenteredUniform };

// Finite-activity jump component. Both admissible laws are symmetric about
// zero by construction, which is what keeps the probability bounds for
// jump diffusions identical to the continuous case.
struct JumpSpec {
    double intensity = 0.0;            // expected jumps per unit time, >= 0
    JumpLaw law = JumpLaw::TwoPoint;
    double magnitude = 0.0;            // +-a for TwoPoint, uniform on [-a,a] otherwise

    double sample(rng::Xoshiro256pp& gen) const;
};

struct ModelSpec {
    Kind kind = Kind::DriftedBM;
    std::map<std::string, double> params;
    std::vector<double> x0;
    std::size_t dim = 1;

    double param(const std::string& name) const;
    double param_or(const std::string& name, double fallback) const;
    bool log_coords() const;                 // GBM / Heston exposed as log-price
    std::vector<double> observable_start() const;  // x0 through the coordinate choice

    std::optional<JumpSpec> jumps() const;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);

    // FNV-1a over the canonical serialization; used to stamp samples.
    std::uint64_t identity_hash() const;
};

// Validates parameter names, ranges, x0 and dim for the kind.
// Every constructor path goes through this; an invalid spec never escapes.
ModelSpec make_model(Kind kind, std::map<std::string, double> params,
                     std::vector<double> x0, std::size_t dim = 1);
void validate(const ModelSpec& spec);

// Drift and diffusion callables of the observable process, plus the jump
// component when present. For Heston the callables are exact only at
// (0, x0): the diffusion depends on the latent variance, whose time-zero
// value is pinned by continuity. Simulation does not go through this view.
struct CoefficientView {
    std::size_t dim = 1;
    std::function<std::vector<double>(double, const std::vector<double>&)> drift;
    std::function<la::Matrix(double, const std::vector<double>&)> diffusion;
    std::optional<JumpSpec> jumps;
};

CoefficientView coefficients(const ModelSpec& spec);

// sigma(0, x0) of the observable process. Degenerate (zero) entries are
// legitimate output; PoissonMartingale has no diffusion part at all and
// throws UnsupportedModel, callers must branch.
la::Matrix small_time_matrix(const ModelSpec& spec);

enum class Admissibility { Holds, HoldsLocally, Violated, NotCheckable };

std::string admissibility_name(Admissibility a);

struct AdmissibilityItem {
    std::string item;     // short slug, e.g. "drift-bounded"
    Admissibility status = Admissibility::NotCheckable;
    std::string note;
};

struct AdmissibilityReport {
    Kind kind = Kind::DriftedBM;
    double horizon = 1.0;
    std::vector<AdmissibilityItem> items;
    bool limit_degenerate = false;  // small-time diffusion limit exists but is singular
    Admissibility overall = Admissibility::NotCheckable;

    nlohmann::json to_json() const;
};

// Per-assumption verdicts for the small-time Gaussian limit machinery,
// resolved analytically from catalog knowledge of each kind.
AdmissibilityReport check_assumptions(const ModelSpec& spec, double horizon = 1.0);

} // namespace smalltime::models
