#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "hdabc/frontier.hpp"
#include "hdabc/model.hpp"
#include "hdabc/ratedist.hpp"

namespace hdabc {

/// Outcome of checking a layered parameter set. The two back-solved
/// equality families are reported as relative residuals; the two rate
/// conditions (common layer decodable by the weak user, refinement layers
/// decodable by the strong user) as slacks in nats, rhs minus lhs.
struct FeasibilityReport {
    bool feasible = false;
    bool ranges_ok = false;                      ///< index ranges and ordering chains hold
    double power_slack = 0.0;                    ///< M*P - sum_m P_m
    std::vector<double> equality_residuals;      ///< relative residuals, first-range then middle-range
    std::array<double, 2> rate_slacks{0.0, 0.0}; ///< {common rate, strong refinement rate}
};

namespace detail {

inline void require_layered_shape(const ProblemSpec& spec, const LayeredParams& q) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const int L = q.L, Kp = q.K_prime;
    if (L < 0 || L > Kp || Kp > std::min(K, M))
        throw IndexRangeMismatch("layered params: need 0 <= L <= K' <= min(K, M)");
    auto expect = [](std::size_t got, int want, const char* what) {
        if (got != static_cast<std::size_t>(want))
            throw IndexRangeMismatch(std::string("layered params: bad length of ") + what);
    };
    expect(q.channel_power.size(), M, "channel_power");
    expect(q.private_power.size(), M - L, "private_power");
    expect(q.strong_code_power.size(), Kp - L, "strong_code_power");
    expect(q.strong_distortion.size(), K, "strong_distortion");
    expect(q.coarse_head.size(), L, "coarse_head");
    expect(q.coarse_tail.size(), K - Kp, "coarse_tail");
    expect(q.side_info.size(), L, "side_info");
}

/// Rate condition slacks in nats: {common, strong refinement}, rhs - lhs.
inline std::array<double, 2> layered_rate_slacks(const ProblemSpec& spec, const LayeredParams& q) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const int L = q.L, Kp = q.K_prime;
    const double ns = spec.noise_strong, nw = spec.noise_weak;

    double lhs_common = 0.0, lhs_refine = 0.0;
    for (int k = 0; k < L; ++k) {
        lhs_common += 0.5 * std::log(spec.variances[k] / q.coarse_head[k]);
        lhs_refine += 0.5 * std::log(q.side_info[k] / q.strong_distortion[k]);
    }
    for (int k = Kp; k < K; ++k) {
        lhs_common += 0.5 * std::log(spec.variances[k] / q.coarse_tail[k - Kp]);
        lhs_refine += 0.5 * std::log(q.coarse_tail[k - Kp] / q.strong_distortion[k]);
    }
    double rhs_common = 0.0, rhs_refine = 0.0;
    for (int m = L; m < M; ++m) {
        const double priv = q.private_power[m - L];
        const double common = std::max(0.0, q.channel_power[m] - priv);
        rhs_common += 0.5 * std::log1p(common / (priv + nw));
        if (m < Kp)
            rhs_refine += 0.5 * std::log1p(q.strong_code_power[m - L] / ns);
        else
            rhs_refine += 0.5 * std::log1p(priv / ns);
    }
    return {rhs_common - lhs_common, rhs_refine - lhs_refine};
}

inline double layered_ds(const ProblemSpec& spec, const LayeredParams& q) {
    double sum = 0.0;
    for (double d : q.strong_distortion) sum += d;
    return sum / static_cast<double>(spec.source_components());
}

inline double layered_dw(const ProblemSpec& spec, const LayeredParams& q) {
    const int K = spec.source_components();
    const int L = q.L, Kp = q.K_prime;
    const double nw = spec.noise_weak;
    double sum = 0.0;
    for (int k = 0; k < L; ++k)
        sum += q.coarse_head[k] / (1.0 + q.channel_power[k] / nw);
    for (int k = L; k < Kp; ++k) {
        const double code = q.strong_code_power[k - L];
        const double uncoded = q.private_power[k - L] - code;
        sum += spec.variances[k] / (1.0 + uncoded / (code + nw));
    }
    for (int k = Kp; k < K; ++k) sum += q.coarse_tail[k - Kp];
    return sum / static_cast<double>(K);
}

}  // namespace detail

/// Checks a layered parameter set against the scheme's conditions: the power
/// budget, the ordering chains, the two back-solved equality families, and
/// the two rate inequalities. tol is relative.
inline FeasibilityReport layered_feasible(const ProblemSpec& spec, const LayeredParams& q,
                                          double tol = 1e-9) {
    detail::require_layered_shape(spec, q);
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const int L = q.L, Kp = q.K_prime;
    const double p = spec.power, ns = spec.noise_strong;

    FeasibilityReport rep;

    double power_sum = 0.0;
    bool ok = true;
    for (int m = 0; m < M; ++m) {
        if (!(q.channel_power[m] >= 0.0)) ok = false;
        power_sum += q.channel_power[m];
    }
    rep.power_slack = M * p - power_sum;
    for (int m = L; m < M; ++m) {
        const double priv = q.private_power[m - L];
        if (!(priv >= 0.0) || priv > q.channel_power[m] * (1.0 + tol)) ok = false;
        if (m < Kp) {
            const double code = q.strong_code_power[m - L];
            if (!(code >= 0.0) || code > priv * (1.0 + tol)) ok = false;
        }
    }
    for (int k = 0; k < L; ++k) {
        const double d = q.strong_distortion[k], dpp = q.side_info[k], dp = q.coarse_head[k];
        if (!(d > 0.0) || d > dpp * (1.0 + tol) || dpp > dp * (1.0 + tol) ||
            dp > spec.variances[k] * (1.0 + tol))
            ok = false;
    }
    for (int k = L; k < Kp; ++k)
        if (!(q.strong_distortion[k] > 0.0) ||
            q.strong_distortion[k] > spec.variances[k] * (1.0 + tol))
            ok = false;
    for (int k = Kp; k < K; ++k) {
        const double d = q.strong_distortion[k], dp = q.coarse_tail[k - Kp];
        if (!(d > 0.0) || d > dp * (1.0 + tol) || dp > spec.variances[k] * (1.0 + tol)) ok = false;
    }
    rep.ranges_ok = ok;

    rep.equality_residuals.reserve(Kp);
    for (int k = 0; k < L; ++k) {
        const double target = 1.0 + q.channel_power[k] / ns;
        rep.equality_residuals.push_back(
            std::abs(q.coarse_head[k] / q.side_info[k] - target) / target);
    }
    for (int k = L; k < Kp; ++k) {
        const double code = q.strong_code_power[k - L];
        const double target = 1.0 + (q.private_power[k - L] - code) / (code + ns);
        rep.equality_residuals.push_back(
            std::abs(spec.variances[k] / q.strong_distortion[k] - target) / target);
    }

    rep.rate_slacks = detail::layered_rate_slacks(spec, q);

    bool feasible = rep.ranges_ok && rep.power_slack >= -tol * M * p;
    for (double r : rep.equality_residuals)
        if (!(r <= tol)) feasible = false;
    for (double s : rep.rate_slacks)
        if (!(s >= -tol * std::max(1.0, std::abs(s)) - tol)) feasible = false;
    rep.feasible = feasible;
    return rep;
}

/// Distortion pair delivered by a feasible layered parameter set.
/// Throws InfeasibleParams when the feasibility check fails.
inline SchemePoint layered_evaluate(const ProblemSpec& spec, const LayeredParams& q,
                                    double tol = 1e-9) {
    const FeasibilityReport rep = layered_feasible(spec, q, tol);
    if (!rep.feasible)
        throw InfeasibleParams("layered_evaluate: parameter set fails the feasibility conditions");
    return SchemePoint{detail::layered_ds(spec, q), detail::layered_dw(spec, q), Scheme::general, q};
}

// ---------------------------------------------------------------------------
// Extreme points
// ---------------------------------------------------------------------------

namespace detail {

struct ExtremePlan {
    WaterfillResult wf;
    int L = 0;        // components whose water-filling rate >= one sub-channel's capacity
    int K_prime = 0;  // components carrying any uncoded share (capped at M)
};

inline ExtremePlan extreme_plan(const ProblemSpec& spec, User user) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const double noise = user == User::strong ? spec.noise_strong : spec.noise_weak;
    ExtremePlan plan;
    plan.wf = point_to_point_optimum(spec, user);
    const double cap_ratio = 1.0 + spec.power / noise;
    // Both predicates select a prefix of the sorted components.
    int l = 0;
    while (l < std::min(K, M) && spec.variances[l] / plan.wf.distortions[l] >= cap_ratio) ++l;
    int kp = 0;
    while (kp < std::min(K, M) && plan.wf.mu <= spec.variances[kp]) ++kp;
    plan.L = l;
    plan.K_prime = std::max(kp, l);
    return plan;
}

inline LayeredParams weak_params_from_plan(const ProblemSpec& spec, const ExtremePlan& plan) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const int L = plan.L, Kp = plan.K_prime;
    const double p = spec.power, ns = spec.noise_strong, nw = spec.noise_weak;

    LayeredParams q;
    q.L = L;
    q.K_prime = Kp;
    q.channel_power.assign(M, p);
    q.private_power.resize(M - L);
    for (int m = L; m < M; ++m)
        q.private_power[m - L] =
            m < Kp ? nw * (spec.variances[m] / plan.wf.distortions[m] - 1.0) : 0.0;
    q.strong_code_power.assign(Kp - L, 0.0);
    q.strong_distortion.resize(K);
    q.coarse_head.resize(L);
    q.side_info.resize(L);
    for (int k = 0; k < L; ++k) {
        q.coarse_head[k] = plan.wf.distortions[k] * (1.0 + p / nw);
        q.side_info[k] = q.coarse_head[k] / (1.0 + p / ns);
        q.strong_distortion[k] = q.side_info[k];  // no refinement layer in this scheme
    }
    for (int k = L; k < Kp; ++k)
        q.strong_distortion[k] = spec.variances[k] / (1.0 + q.private_power[k - L] / ns);
    q.coarse_tail.resize(K - Kp);
    for (int k = Kp; k < K; ++k) {
        q.coarse_tail[k - Kp] = plan.wf.distortions[k];
        q.strong_distortion[k] = plan.wf.distortions[k];
    }
    return q;
}

inline LayeredParams strong_params_from_plan(const ProblemSpec& spec, const ExtremePlan& plan) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const int L = plan.L, Kp = plan.K_prime;
    const double p = spec.power, ns = spec.noise_strong;

    LayeredParams q;
    q.L = L;
    q.K_prime = Kp;
    q.channel_power.assign(M, p);
    q.private_power.assign(M - L, p);  // no common layer anywhere
    q.strong_code_power.resize(Kp - L);
    for (int m = L; m < Kp; ++m) {
        // r <= 1 + P/N_s on this range, so the solution is non-negative up
        // to rounding at the range boundary.
        const double r = spec.variances[m] / plan.wf.distortions[m];
        q.strong_code_power[m - L] = std::max(0.0, (p - ns * (r - 1.0)) / r);
    }
    q.strong_distortion = plan.wf.distortions;
    q.coarse_head.resize(L);
    q.side_info.resize(L);
    for (int k = 0; k < L; ++k) {
        q.coarse_head[k] = spec.variances[k];  // zero-rate coarse layer: the component itself
        q.side_info[k] = spec.variances[k] / (1.0 + p / ns);
    }
    q.coarse_tail.resize(K - Kp);
    for (int k = Kp; k < K; ++k) q.coarse_tail[k - Kp] = spec.variances[k];
    return q;
}

}  // namespace detail

/// Layered parameter set realizing the weak-user-optimal point.
inline LayeredParams weak_optimal_params(const ProblemSpec& spec) {
    return detail::weak_params_from_plan(spec, detail::extreme_plan(spec, User::weak));
}

/// Layered parameter set realizing the strong-user-optimal point.
inline LayeredParams strong_optimal_params(const ProblemSpec& spec) {
    return detail::strong_params_from_plan(spec, detail::extreme_plan(spec, User::strong));
}

/// Trade-off point where the weak user is exactly point-to-point optimal and
/// the strong user gains from the uncoded layers: D_w = D_w*, and D_s sums
/// the per-component ratios (1+P/N_w)/(1+P/N_s) over the hybrid ranges.
inline SchemePoint weak_user_optimal(const ProblemSpec& spec) {
    const auto plan = detail::extreme_plan(spec, User::weak);
    const int K = spec.source_components();
    const double p = spec.power, ns = spec.noise_strong, nw = spec.noise_weak;
    double ds = 0.0;
    for (int k = 0; k < K; ++k) {
        const double d = plan.wf.distortions[k];
        if (k < plan.L) {
            ds += (1.0 + p / nw) / (1.0 + p / ns) * d;
        } else if (k < plan.K_prime) {
            const double pu = nw * (spec.variances[k] / d - 1.0);
            ds += (1.0 + pu / nw) / (1.0 + pu / ns) * d;
        } else {
            ds += d;
        }
    }
    return SchemePoint{ds / K, plan.wf.total_distortion, Scheme::weak_opt,
                       detail::weak_params_from_plan(spec, plan)};
}

/// Trade-off point where the strong user is exactly point-to-point optimal
/// and the weak user estimates the uncoded layers, with the strong-only
/// codeword power acting as interference.
inline SchemePoint strong_user_optimal(const ProblemSpec& spec) {
    const auto plan = detail::extreme_plan(spec, User::strong);
    const int K = spec.source_components();
    const double p = spec.power, ns = spec.noise_strong, nw = spec.noise_weak;
    double dw = 0.0;
    for (int k = 0; k < K; ++k) {
        if (k < plan.L) {
            dw += spec.variances[k] / (1.0 + p / nw);
        } else if (k < plan.K_prime) {
            const double r = spec.variances[k] / plan.wf.distortions[k];
            const double code = (p - ns * (r - 1.0)) / r;
            dw += spec.variances[k] / (1.0 + (p - code) / (code + nw));
        } else {
            dw += spec.variances[k];
        }
    }
    return SchemePoint{plan.wf.total_distortion, dw / K, Scheme::strong_opt,
                       detail::strong_params_from_plan(spec, plan)};
}

// ---------------------------------------------------------------------------
// Grid search over the layered family
// ---------------------------------------------------------------------------

/// Resolution of the layered grid search. Each (L, K') block reduces its
/// per-axis count (never below 3) so the block stays within
/// max_points_per_block; a note goes to the warning sink when that happens.
struct GridSpec {
    int points_per_axis = 33;
    bool refine = true;                  ///< one local pass at halved step around the incumbent
    double max_points_per_block = 4e6;
};

namespace detail {

inline int layered_axis_count(int K, int M, int L, int Kp) {
    return (M - 1) + (M - L) + (Kp - L) + 2 * L + 2 * (K - Kp);
}

/// Maps axis fractions in [0,1] to a structurally valid parameter set. The
/// equality conditions are used to eliminate the side-information and
/// middle-range distortions, so only the two rate conditions can fail.
inline void layered_from_fractions(const ProblemSpec& spec, int L, int Kp,
                                   const std::vector<double>& x, LayeredParams& q) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    const double p = spec.power, ns = spec.noise_strong;
    q.L = L;
    q.K_prime = Kp;
    q.channel_power.resize(M);
    q.private_power.resize(M - L);
    q.strong_code_power.resize(Kp - L);
    q.strong_distortion.resize(K);
    q.coarse_head.resize(L);
    q.side_info.resize(L);
    q.coarse_tail.resize(K - Kp);

    std::size_t i = 0;
    double budget = M * p;
    for (int m = 0; m + 1 < M; ++m) {
        q.channel_power[m] = x[i++] * budget;
        budget -= q.channel_power[m];
    }
    q.channel_power[M - 1] = budget;
    for (int m = L; m < M; ++m) q.private_power[m - L] = x[i++] * q.channel_power[m];
    for (int m = L; m < Kp; ++m) q.strong_code_power[m - L] = x[i++] * q.private_power[m - L];
    for (int k = 0; k < L; ++k) {
        const double dp = x[i++] * spec.variances[k];
        q.coarse_head[k] = dp;
        q.side_info[k] = dp / (1.0 + q.channel_power[k] / ns);
        q.strong_distortion[k] = x[i++] * q.side_info[k];
    }
    for (int k = L; k < Kp; ++k) {
        const double code = q.strong_code_power[k - L];
        const double uncoded = q.private_power[k - L] - code;
        q.strong_distortion[k] = spec.variances[k] / (1.0 + uncoded / (code + ns));
    }
    for (int k = Kp; k < K; ++k) {
        const double dp = x[i++] * spec.variances[k];
        q.coarse_tail[k - Kp] = dp;
        q.strong_distortion[k] = x[i++] * dp;
    }
}

/// Streaming 2-D skyline of grid candidates, keyed by d_s; keeps the axis
/// fractions so surviving parameter sets can be rebuilt afterwards.
struct GridSkyline {
    std::map<double, std::pair<double, std::vector<double>>> entries;

    void insert(double ds, double dw, const std::vector<double>& x) {
        auto it = entries.upper_bound(ds);
        if (it != entries.begin()) {
            auto prev = std::prev(it);
            if (prev->second.first <= dw) return;  // dominated (or duplicate)
            if (prev->first == ds) it = entries.erase(prev);  // same d_s, worse d_w
        }
        while (it != entries.end() && it->second.first >= dw) it = entries.erase(it);
        entries.emplace(ds, std::make_pair(dw, x));
    }
};

}  // namespace detail

/// Sweeps the layered family: enumerates (L, K'), grid-searches the free
/// axes (power splits and the free distortion knobs left after imposing the
/// equality conditions), filters by feasibility, and returns the
/// non-dominated set merged across blocks. The two extreme-point parameter
/// sets seed the search, so the endpoints of the returned frontier are exact.
/// weight_on_ds in [0,1] picks the incumbent the refinement pass zooms into.
inline std::vector<SchemePoint> layered_optimize(const ProblemSpec& spec, double weight_on_ds,
                                                 const GridSpec& grid = {},
                                                 std::ostream* warnings = nullptr) {
    const int K = spec.source_components();
    const int M = spec.subchannels;
    if (K > 6 || M > 6)
        throw std::invalid_argument("layered_optimize: practical bound is K, M <= 6");
    if (!(weight_on_ds >= 0.0 && weight_on_ds <= 1.0))
        throw std::invalid_argument("layered_optimize: weight must be in [0,1]");
    if (grid.points_per_axis < 2)
        throw std::invalid_argument("layered_optimize: need at least 2 grid points per axis");
    if (grid.points_per_axis < 3 && warnings)
        *warnings << "GridTooCoarse: " << grid.points_per_axis << " points per axis\n";

    std::vector<SchemePoint> all;
    all.push_back(layered_evaluate(spec, weak_optimal_params(spec)));
    all.push_back(layered_evaluate(spec, strong_optimal_params(spec)));

    const double w = weight_on_ds;
    const int bound = std::min(K, M);
    LayeredParams q;
    for (int L = 0; L <= bound; ++L) {
        for (int Kp = L; Kp <= bound; ++Kp) {
            const int dims = detail::layered_axis_count(K, M, L, Kp);
            int n = grid.points_per_axis;
            while (n > 3 && std::pow(static_cast<double>(n), dims) > grid.max_points_per_block)
                --n;
            if (n < grid.points_per_axis && warnings)
                *warnings << "grid reduced to " << n << " points per axis for (L=" << L
                          << ", K'=" << Kp << ") to stay within the point budget\n";

            detail::GridSkyline skyline;
            double best_obj = std::numeric_limits<double>::infinity();
            std::vector<double> best_x;

            std::vector<double> x(dims), lo(dims, 0.0), hi(dims, 1.0);
            std::vector<int> idx(dims, 0);
            auto scan = [&](const std::vector<double>& a, const std::vector<double>& b, int npts) {
                std::fill(idx.begin(), idx.end(), 0);
                const double denom = npts - 1;
                while (true) {
                    for (int d = 0; d < dims; ++d) x[d] = a[d] + (b[d] - a[d]) * idx[d] / denom;
                    detail::layered_from_fractions(spec, L, Kp, x, q);
                    const auto slacks = detail::layered_rate_slacks(spec, q);
                    if (slacks[0] >= -1e-12 && slacks[1] >= -1e-12) {
                        const double ds = detail::layered_ds(spec, q);
                        const double dw = detail::layered_dw(spec, q);
                        skyline.insert(ds, dw, x);
                        const double obj = w * ds + (1.0 - w) * dw;
                        if (obj < best_obj) {
                            best_obj = obj;
                            best_x = x;
                        }
                    }
                    int d = 0;
                    while (d < dims && ++idx[d] == npts) idx[d++] = 0;
                    if (d == dims) break;
                }
            };
            scan(lo, hi, n);
            if (grid.refine && !best_x.empty()) {
                const double step = 1.0 / (n - 1);
                std::vector<double> rlo(dims), rhi(dims);
                for (int d = 0; d < dims; ++d) {
                    rlo[d] = std::max(0.0, best_x[d] - step);
                    rhi[d] = std::min(1.0, best_x[d] + step);
                }
                if (std::pow(5.0, dims) <= grid.max_points_per_block) scan(rlo, rhi, 5);
            }

            for (const auto& [ds, entry] : skyline.entries) {
                (void)ds;
                detail::layered_from_fractions(spec, L, Kp, entry.second, q);
                try {
                    all.push_back(layered_evaluate(spec, q));
                } catch (const InfeasibleParams&) {
                    // boundary float noise; drop the candidate
                }
            }
        }
    }
    return pareto_filter(std::move(all));
}

}  // namespace hdabc
