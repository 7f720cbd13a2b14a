#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hdabc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Invalid input that violates a documented precondition.
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonPositiveParameter : SpecError { using SpecError::SpecError; };
struct NoiseOrderViolation : SpecError { using SpecError::SpecError; };
struct NonPositiveNoise : SpecError { using SpecError::SpecError; };
struct NegativeRate : SpecError { using SpecError::SpecError; };
struct IndexRangeMismatch : SpecError { using SpecError::SpecError; };
struct AlphaOutOfRange : SpecError { using SpecError::SpecError; };
struct AlphaMismatch : SpecError { using SpecError::SpecError; };
struct NonWhiteSource : SpecError { using SpecError::SpecError; };
struct BandwidthMismatch : SpecError { using SpecError::SpecError; };
struct ShapeMismatch : SpecError { using SpecError::SpecError; };

/// Parameter vector fails the layered-scheme feasibility conditions.
struct InfeasibleParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SinkWriteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Problem description
// ---------------------------------------------------------------------------

/// A parallel Gaussian source broadcast to two users over parallel Gaussian
/// sub-channels: K independent components with variances sigma_k^2 (sorted
/// non-increasing after validate()), M sub-channels with average power P per
/// sub-channel, and per-sub-channel noise variances N_s <= N_w. All units
/// linear; all rates elsewhere in the library are nats.
struct ProblemSpec {
    std::vector<double> variances;  ///< sigma_k^2
    int subchannels = 1;            ///< M
    double power = 1.0;             ///< P, average per sub-channel
    double noise_strong = 1.0;      ///< N_s
    double noise_weak = 1.0;        ///< N_w

    int source_components() const { return static_cast<int>(variances.size()); }

    double variance_mean() const {
        return std::accumulate(variances.begin(), variances.end(), 0.0) /
               static_cast<double>(variances.size());
    }
};

/// Sorts the variances non-increasing and checks every model invariant.
/// Idempotent. N_s == N_w is allowed (degenerate broadcast channel).
inline ProblemSpec validate(ProblemSpec spec) {
    if (spec.variances.empty())
        throw NonPositiveParameter("variances: need at least one source component");
    if (spec.subchannels < 1)
        throw NonPositiveParameter("subchannels: must be >= 1");
    for (double v : spec.variances)
        if (!(v > 0.0))
            throw NonPositiveParameter("variances: all entries must be > 0");
    if (!(spec.power > 0.0))
        throw NonPositiveParameter("power: must be > 0");
    if (!(spec.noise_strong > 0.0))
        throw NonPositiveParameter("noise_strong: must be > 0");
    if (!(spec.noise_weak > 0.0))
        throw NonPositiveParameter("noise_weak: must be > 0");
    if (spec.noise_strong > spec.noise_weak)
        throw NoiseOrderViolation("noise_strong must not exceed noise_weak");
    std::sort(spec.variances.begin(), spec.variances.end(), std::greater<>());
    return spec;
}

enum class User { strong, weak };

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// Reverse water-filling outcome: water level mu, per-component distortions
/// D_k = min(mu, sigma_k^2), their average, and the achieved total rate in
/// nats per source vector.
struct WaterfillResult {
    double mu = 0.0;
    std::vector<double> distortions;
    double total_distortion = 0.0;
    double total_rate = 0.0;
};

/// Parameters of the general layered hybrid scheme. Indices are 0-based:
/// components [0,L) carry a common coarse layer, their quantization error
/// uncoded on their own sub-channel, and a strong-user-only refinement;
/// components [L,K') are sent (partially) uncoded on their own sub-channel;
/// components [K',K) are coded only. Sub-channel k carries the analog part
/// of component k for k < K'; sub-channels [L,M) additionally carry the
/// coded layers.
struct LayeredParams {
    int L = 0;
    int K_prime = 0;
    std::vector<double> channel_power;      ///< P_m, size M
    std::vector<double> private_power;      ///< P'_m, channels [L,M): power not carrying the common codeword
    std::vector<double> strong_code_power;  ///< P''_m, channels [L,K'): strong-user-only codeword power
    std::vector<double> strong_distortion;  ///< D_k, size K: per-component MSE at the strong user
    std::vector<double> coarse_head;        ///< D'_k, components [0,L): coarse-layer MSE
    std::vector<double> coarse_tail;        ///< D'_k, components [K',K): coarse-layer MSE
    std::vector<double> side_info;          ///< D''_k, components [0,L): strong user's pre-refinement MSE

    // Convenience lookups in 0-based component/channel index.
    double private_power_at(int m) const { return private_power.at(static_cast<std::size_t>(m - L)); }
    double strong_code_power_at(int m) const { return strong_code_power.at(static_cast<std::size_t>(m - L)); }
    double coarse_at(int k) const {
        return k < L ? coarse_head.at(static_cast<std::size_t>(k))
                     : coarse_tail.at(static_cast<std::size_t>(k - K_prime));
    }
};

/// White-source bandwidth-mismatch operating point: alpha = M/K channel uses
/// per source sample, lambda/gamma in [0,1] the two power-split knobs.
struct MismatchParams {
    double sigma2 = 1.0;
    double alpha = 1.0;
    double lambda = 0.0;
    double gamma = 0.0;
};

/// Power share beta in [0,1] given to the refinement message of the
/// separation (layered digital) baseline.
struct SeparationParams {
    double beta = 0.0;
};

/// Per-sub-channel powers of the uncoded-transmission baseline.
struct AnalogParams {
    std::vector<double> channel_power;
};

enum class Scheme { separation, analog, weak_opt, strong_opt, general, bc_closed, be_closed };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::separation: return "separation";
        case Scheme::analog: return "analog";
        case Scheme::weak_opt: return "weak_opt";
        case Scheme::strong_opt: return "strong_opt";
        case Scheme::general: return "general";
        case Scheme::bc_closed: return "bc_closed";
        case Scheme::be_closed: return "be_closed";
    }
    return "unknown";
}

using PointParams =
    std::variant<std::monostate, SeparationParams, MismatchParams, LayeredParams, AnalogParams>;

/// An achievable distortion pair (strong user, weak user) together with the
/// scheme and parameters that produced it. 0 < d_s <= d_w for every scheme
/// in this library.
struct SchemePoint {
    double d_s = 0.0;
    double d_w = 0.0;
    Scheme scheme = Scheme::general;
    PointParams params{};
};

}  // namespace hdabc
