#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdabc/model.hpp"
#include "hdabc/ratedist.hpp"

namespace hdabc {

/// Digital separation baseline: a common source layer decoded by both users
/// plus a refinement layer for the strong user, with power share beta on the
/// refinement message. Layering is lossless per component for Gaussian
/// sources, so each user's distortion is the reverse water-filling solution
/// at its delivered total rate.
inline SchemePoint separation_point(const ProblemSpec& spec, SeparationParams params) {
    const double beta = params.beta;
    if (!(beta >= 0.0 && beta <= 1.0))
        throw SpecError("separation_point: beta must lie in [0,1]");
    const double p = spec.power;
    const double r_base = 0.5 * std::log1p((1.0 - beta) * p / (beta * p + spec.noise_weak));
    const double r_refine = 0.5 * std::log1p(beta * p / spec.noise_strong);
    const double m = spec.subchannels;
    const double dw = reverse_waterfill(spec.variances, m * r_base).total_distortion;
    const double ds = reverse_waterfill(spec.variances, m * (r_base + r_refine)).total_distortion;
    return SchemePoint{ds, dw, Scheme::separation, params};
}

/// Canonical refinement power share: the lower end of the bracket inside
/// which both users' delivered rates are within one bit of their
/// point-to-point capacities, clipped to [0,1]. Returns 0 when N_s = N_w.
inline double beta_bar(const ProblemSpec& spec) {
    const double p = spec.power, ns = spec.noise_strong, nw = spec.noise_weak;
    if (nw <= ns) return 0.0;
    const double lower = 1.0 / (p / (nw - ns) + 2.0 * p / (p + ns)) - ns / p;
    return std::min(1.0, std::max(0.0, lower));
}

/// Per-user optimality gaps of the separation baseline at beta_bar.
struct SeparationGap {
    double gap_strong_bits = 0.0;  ///< (1/2)log2(D_s / D_s*)
    double gap_weak_bits = 0.0;    ///< (1/2)log2(D_w / D_w*)
    double beta = 0.0;
};

/// Evaluates the separation baseline at the canonical beta_bar and returns
/// both users' gaps to their point-to-point optima in bits. Each gap is at
/// most M/K for a white source. Throws NonWhiteSource otherwise.
inline SeparationGap separation_optimality_gap(const ProblemSpec& spec) {
    const double v0 = spec.variances.front();
    for (double v : spec.variances)
        if (std::abs(v - v0) > 1e-12 * v0)
            throw NonWhiteSource("separation_optimality_gap: requires equal variances");

    SeparationGap out;
    out.beta = beta_bar(spec);
    const SchemePoint pt = separation_point(spec, SeparationParams{out.beta});
    const double ds_opt = point_to_point_optimum(spec, User::strong).total_distortion;
    const double dw_opt = point_to_point_optimum(spec, User::weak).total_distortion;
    out.gap_strong_bits = 0.5 * std::log2(pt.d_s / ds_opt);
    out.gap_weak_bits = 0.5 * std::log2(pt.d_w / dw_opt);
    return out;
}

/// Uncoded transmission with a given per-sub-channel power allocation;
/// component k rides sub-channel k, each user scales its observation
/// (LMMSE). Requires K = M.
inline SchemePoint analog_point(const ProblemSpec& spec, std::vector<double> powers) {
    const int k = spec.source_components();
    if (k != spec.subchannels)
        throw BandwidthMismatch("analog_point: requires K = M");
    if (powers.size() != spec.variances.size())
        throw IndexRangeMismatch("analog_point: allocation length must equal K");
    double sum = 0.0;
    for (double pw : powers) {
        if (!(pw >= 0.0)) throw NonPositiveParameter("analog_point: powers must be >= 0");
        sum += pw;
    }
    const double budget = static_cast<double>(spec.subchannels) * spec.power;
    if (sum > budget * (1.0 + 1e-12))
        throw SpecError("analog_point: allocation exceeds the power budget");

    double ds = 0.0, dw = 0.0;
    for (int i = 0; i < k; ++i) {
        ds += spec.variances[i] * spec.noise_strong / (powers[i] + spec.noise_strong);
        dw += spec.variances[i] * spec.noise_weak / (powers[i] + spec.noise_weak);
    }
    return SchemePoint{ds / k, dw / k, Scheme::analog, AnalogParams{std::move(powers)}};
}

/// Allocation minimizing the weak user's uncoded distortion under the sum
/// power budget: the stationarity condition gives P_k = max(0, c*sigma_k - N_w)
/// with c fixing the budget; the active set is a prefix of the sorted
/// components, so the exact solution is a finite walk.
inline std::vector<double> optimal_analog_allocation(const ProblemSpec& spec) {
    const int k = spec.source_components();
    if (k != spec.subchannels)
        throw BandwidthMismatch("optimal_analog_allocation: requires K = M");
    const double nw = spec.noise_weak;
    const double budget = static_cast<double>(spec.subchannels) * spec.power;
    std::vector<double> sigma(spec.variances.size());
    std::transform(spec.variances.begin(), spec.variances.end(), sigma.begin(),
                   [](double v) { return std::sqrt(v); });

    double c = 0.0;
    double sigma_sum = 0.0;
    for (int j = 1; j <= k; ++j) {
        sigma_sum += sigma[j - 1];
        const double cj = (budget + j * nw) / sigma_sum;
        const bool last_positive = cj * sigma[j - 1] > nw;
        const bool next_inactive = (j == k) || (cj * sigma[j] <= nw);
        if (last_positive && next_inactive) {
            c = cj;
            break;
        }
    }
    std::vector<double> powers(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) powers[i] = std::max(0.0, c * sigma[i] - nw);
    return powers;
}

/// Uncoded transmission with the weak-user-optimal allocation.
inline SchemePoint analog_point(const ProblemSpec& spec) {
    return analog_point(spec, optimal_analog_allocation(spec));
}

struct AnalogDigitalRatio {
    double finite_ratio = 0.0;  ///< optimal uncoded MSE over water-filled digital MSE at this P/N
    double asymptotic = 0.0;    ///< ((sum sigma_k / K) / (prod sigma_k)^(1/K))^2, the high-power limit
};

/// Uncoded-versus-digital loss for a matched-bandwidth point-to-point link:
/// the measured ratio at finite power and its arithmetic/geometric-mean
/// limit, which the finite ratio approaches as P/N grows.
inline AnalogDigitalRatio analog_digital_ratio(const std::vector<double>& variances, double power,
                                               double noise) {
    ProblemSpec spec;
    spec.variances = variances;
    spec.subchannels = static_cast<int>(variances.size());
    spec.power = power;
    spec.noise_strong = noise;
    spec.noise_weak = noise;
    spec = validate(std::move(spec));

    const double analog = analog_point(spec).d_w;
    const double digital =
        reverse_waterfill(spec.variances,
                          spec.subchannels * awgn_capacity(power, noise)).total_distortion;

    double am = 0.0, log_gm = 0.0;
    for (double v : spec.variances) {
        am += std::sqrt(v);
        log_gm += 0.5 * std::log(v);
    }
    am /= static_cast<double>(spec.variances.size());
    const double gm = std::exp(log_gm / static_cast<double>(spec.variances.size()));

    AnalogDigitalRatio out;
    out.finite_ratio = analog / digital;
    out.asymptotic = (am / gm) * (am / gm);
    return out;
}

}  // namespace hdabc
