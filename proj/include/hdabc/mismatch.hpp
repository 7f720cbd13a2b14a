#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdabc/frontier.hpp"
#include "hdabc/model.hpp"

namespace hdabc {

namespace detail {

inline void require_mismatch_inputs(const MismatchParams& p, double power, double ns, double nw) {
    if (!(p.sigma2 > 0.0)) throw NonPositiveParameter("mismatch: sigma2 must be > 0");
    if (!(power >= 0.0)) throw NonPositiveParameter("mismatch: power must be >= 0");
    if (!(ns > 0.0) || !(nw > 0.0)) throw NonPositiveNoise("mismatch: noises must be > 0");
    if (ns > nw) throw NoiseOrderViolation("mismatch: noise_strong must not exceed noise_weak");
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0) || !(p.gamma >= 0.0 && p.gamma <= 1.0))
        throw SpecError("mismatch: lambda and gamma must lie in [0,1]");
}

}  // namespace detail

/// Closed-form trade-off point for a white source under bandwidth
/// contraction (alpha = M/K < 1): alpha*K components ride their own
/// sub-channel partially uncoded, the rest are coded only.
inline SchemePoint bc_point(const MismatchParams& p, double power, double ns, double nw) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0))
        throw AlphaOutOfRange("bc_point: requires 0 < alpha < 1");
    detail::require_mismatch_inputs(p, power, ns, nw);
    const double a = p.alpha, l = p.lambda, g = p.gamma, s2 = p.sigma2;
    const double e = a / (1.0 - a);
    const double dw = a * s2 * (l * g * power + nw) / (l * power + nw) +
                      (1.0 - a) * s2 * std::pow((l * power + nw) / (power + nw), e);
    const double ds =
        a * s2 * (l * g * power + ns) / (l * power + ns) +
        (1.0 - a) * s2 *
            std::pow((l * power + nw) / (power + nw) * ns / (l * g * power + ns), e);
    return SchemePoint{ds, dw, Scheme::bc_closed, p};
}

/// Closed-form trade-off point for a white source under bandwidth expansion
/// (alpha = M/K > 1): every component rides its own sub-channel uncoded, the
/// excess band carries the coded layers.
inline SchemePoint be_point(const MismatchParams& p, double power, double ns, double nw) {
    if (!(p.alpha > 1.0)) throw AlphaOutOfRange("be_point: requires alpha > 1");
    detail::require_mismatch_inputs(p, power, ns, nw);
    const double a = p.alpha, l = p.lambda, g = p.gamma, s2 = p.sigma2;
    const double pe = a * (1.0 - g) * power / (a - 1.0);  // per-channel power in the excess band
    const double ratio = (pe + nw) / (l * pe + nw);
    const double dw = s2 / (std::pow(ratio, a - 1.0) * (1.0 + a * g * power / nw));
    const double ds = s2 / (std::pow(ratio, a - 1.0) * (1.0 + a * g * power / ns) *
                            std::pow((l * pe + ns) / ns, a - 1.0));
    return SchemePoint{ds, dw, Scheme::be_closed, p};
}

namespace detail {

inline void require_alpha_realized(double alpha, int K, int M) {
    if (K < 1 || M < 1) throw NonPositiveParameter("substitution: K and M must be >= 1");
    const double realized = static_cast<double>(M) / static_cast<double>(K);
    if (std::abs(realized - alpha) > 1e-12 * std::max(1.0, alpha))
        throw AlphaMismatch("substitution: M/K must equal alpha exactly");
}

}  // namespace detail

/// Layered parameter set realizing the bandwidth-contraction closed form at
/// (lambda, gamma) for an integer realization M/K = alpha < 1. Solves the
/// three defining equations for the common, middle and tail distortions; the
/// result passes layered_feasible with zero rate slack.
inline LayeredParams bc_substitution(const MismatchParams& p, double power, double ns, double nw,
                                     int K, int M) {
    if (!(p.alpha > 0.0 && p.alpha < 1.0))
        throw AlphaOutOfRange("bc_substitution: requires 0 < alpha < 1");
    detail::require_mismatch_inputs(p, power, ns, nw);
    detail::require_alpha_realized(p.alpha, K, M);

    const double l = p.lambda, g = p.gamma, s2 = p.sigma2;
    const double expo = static_cast<double>(M) / static_cast<double>(K - M);  // = alpha/(1-alpha)
    const double mid = s2 * (l * g * power + ns) / (l * power + ns);
    const double coarse_tail = s2 * std::pow((l * power + nw) / (power + nw), expo);
    const double fine_tail = coarse_tail * std::pow(ns / (l * g * power + ns), expo);

    LayeredParams q;
    q.L = 0;
    q.K_prime = M;
    q.channel_power.assign(M, power);
    q.private_power.assign(M, l * power);
    q.strong_code_power.assign(M, l * g * power);
    q.strong_distortion.assign(K, fine_tail);
    std::fill(q.strong_distortion.begin(), q.strong_distortion.begin() + M, mid);
    q.coarse_tail.assign(K - M, coarse_tail);
    return q;
}

/// Layered parameter set realizing the bandwidth-expansion closed form at
/// (lambda, gamma) for an integer realization M/K = alpha > 1.
inline LayeredParams be_substitution(const MismatchParams& p, double power, double ns, double nw,
                                     int K, int M) {
    if (!(p.alpha > 1.0)) throw AlphaOutOfRange("be_substitution: requires alpha > 1");
    detail::require_mismatch_inputs(p, power, ns, nw);
    detail::require_alpha_realized(p.alpha, K, M);

    const double a = p.alpha, l = p.lambda, g = p.gamma, s2 = p.sigma2;
    const double pe = a * (1.0 - g) * power / (a - 1.0);
    const double expo = static_cast<double>(M - K) / static_cast<double>(K);  // = alpha - 1
    const double coarse = s2 * std::pow((l * pe + nw) / (pe + nw), expo);
    const double side = coarse / (1.0 + a * g * power / ns);
    const double fine = side * std::pow(ns / (l * pe + ns), expo);

    LayeredParams q;
    q.L = K;
    q.K_prime = K;
    q.channel_power.assign(M, pe);
    std::fill(q.channel_power.begin(), q.channel_power.begin() + K, a * g * power);
    q.private_power.assign(M - K, l * pe);
    q.strong_distortion.assign(K, fine);
    q.coarse_head.assign(K, coarse);
    q.side_info.assign(K, side);
    return q;
}

/// Excess distortion of the previously best hybrid proposal over this
/// family's strong-user-optimal point, in MSE at the weak user; strictly
/// positive for every valid input.
inline double mp_gap_strong_opt(double sigma2, double power, double ns, double nw, double alpha) {
    if (!(sigma2 > 0.0)) throw NonPositiveParameter("mp_gap_strong_opt: sigma2 must be > 0");
    if (!(power > 0.0)) throw NonPositiveParameter("mp_gap_strong_opt: power must be > 0");
    if (!(ns > 0.0) || !(nw > 0.0)) throw NonPositiveNoise("mp_gap_strong_opt: noises must be > 0");
    if (ns > nw) throw NoiseOrderViolation("mp_gap_strong_opt: noise order violated");
    if (!(alpha > 0.0) || alpha == 1.0)
        throw AlphaOutOfRange("mp_gap_strong_opt: requires alpha > 0, alpha != 1");
    if (alpha < 1.0)
        return alpha * sigma2 * ns / (nw + power) * (1.0 - std::pow(1.0 + power / ns, -alpha));
    return sigma2 / (std::pow(1.0 + power / ns, alpha) * (1.0 + nw / power));
}

/// Non-dominated set of the closed-form (lambda, gamma) family on an n-by-n
/// grid. The two analytically known extreme operating points (weak-optimal
/// and strong-optimal) are appended so the frontier endpoints are exact
/// rather than grid-limited.
inline std::vector<SchemePoint> mismatch_frontier(double sigma2, double power, double ns,
                                                  double nw, double alpha, int grid_n = 201) {
    if (grid_n < 2) throw std::invalid_argument("mismatch_frontier: grid must have >= 2 points");
    if (!(alpha > 0.0) || alpha == 1.0)
        throw AlphaOutOfRange("mismatch_frontier: requires alpha > 0, alpha != 1");
    const bool contraction = alpha < 1.0;
    auto eval = [&](double l, double g) {
        MismatchParams p{sigma2, alpha, l, g};
        return contraction ? bc_point(p, power, ns, nw) : be_point(p, power, ns, nw);
    };

    std::vector<SchemePoint> pts;
    pts.reserve(static_cast<std::size_t>(grid_n) * grid_n + 2);
    for (int i = 0; i < grid_n; ++i) {
        const double l = static_cast<double>(i) / (grid_n - 1);
        for (int j = 0; j < grid_n; ++j)
            pts.push_back(eval(l, static_cast<double>(j) / (grid_n - 1)));
    }
    if (power > 0.0) {
        auto clamp01 = [](double v) { return std::min(1.0, std::max(0.0, v)); };
        if (contraction) {
            // Interior extremizers of the two closed forms.
            const double lw = (std::pow(nw, 1.0 - alpha) * std::pow(power + nw, alpha) - nw) / power;
            const double gs = (std::pow(ns, alpha) * std::pow(power + ns, 1.0 - alpha) - ns) / power;
            pts.push_back(eval(clamp01(lw), 0.0));
            pts.push_back(eval(1.0, clamp01(gs)));
        } else {
            pts.push_back(eval(0.0, 1.0 / alpha));
            pts.push_back(eval(1.0, 1.0 / alpha));
        }
    }
    return pareto_filter(std::move(pts));
}

}  // namespace hdabc
