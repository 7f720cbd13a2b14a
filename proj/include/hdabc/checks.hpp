#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "hdabc/baselines.hpp"
#include "hdabc/frontier.hpp"
#include "hdabc/mcsim.hpp"
#include "hdabc/mismatch.hpp"
#include "hdabc/model.hpp"
#include "hdabc/ratedist.hpp"
#include "hdabc/schemes.hpp"

namespace hdabc::checks {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

class Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct Rand {
    std::uint64_t state;
    explicit Rand(std::uint64_t seed) : state(seed) {}
    double unif() {
        state += 0x9e3779b97f4a7c15ULL;
        return (static_cast<double>(rng::mix64(state) >> 11) + 0.5) * 0x1.0p-53;
    }
    double log_uniform(double lo, double hi) { return lo * std::pow(hi / lo, unif()); }
    int int_in(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(unif() * (hi - lo + 1)) % (hi - lo + 1);
    }
};

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

inline ProblemSpec random_spec(Rand& r, int kmax, bool square, bool white) {
    ProblemSpec spec;
    const int k = r.int_in(1, kmax);
    spec.subchannels = square ? k : r.int_in(1, kmax);
    spec.variances.resize(k);
    if (white) {
        const double v = r.log_uniform(0.01, 10.0);
        std::fill(spec.variances.begin(), spec.variances.end(), v);
    } else {
        for (double& v : spec.variances) v = r.log_uniform(0.01, 10.0);
    }
    spec.power = 1.0;
    const double n1 = spec.power / std::pow(10.0, 3.0 * r.unif());  // SNR 0..30 dB
    const double n2 = spec.power / std::pow(10.0, 3.0 * r.unif());
    spec.noise_strong = std::min(n1, n2);
    spec.noise_weak = std::max(n1, n2);
    return validate(std::move(spec));
}

/// Frontier points sorted by ascending d_s; true when some frontier point
/// weakly dominates (ds, dw) within the given slack.
inline bool dominated_by(const std::vector<SchemePoint>& frontier, double ds, double dw,
                         double slack) {
    auto it = std::upper_bound(frontier.begin(), frontier.end(), ds + slack,
                               [](double v, const SchemePoint& p) { return v < p.d_s; });
    if (it == frontier.begin()) return false;
    return std::prev(it)->d_w <= dw + slack;
}

struct FigureSetting {
    double alpha;
    double noise_strong;
    int K, M;
};

inline std::vector<FigureSetting> figure_settings() {
    // sigma2 = 1, P = 1, N_w = 1 throughout; N_s from the stated P/N_s.
    return {{0.5, 0.01, 2, 1}, {2.0, 0.01, 1, 2}, {1.5, std::pow(10.0, -0.4), 2, 3}};
}

}  // namespace detail

/// Closed-form mismatch curves against the general layered scheme fed with
/// the corresponding substitution parameters, across both mismatch
/// directions and the full (lambda, gamma) square.
inline CheckResult check_substitution_bridge() {
    detail::Timer timer;
    CheckResult res{"substitution-bridge", true, "", 0.0};
    const struct {
        double alpha;
        int K, M;
    } cases[] = {{0.25, 4, 1}, {0.5, 2, 1}, {0.75, 4, 3}, {1.5, 2, 3}, {2.0, 1, 2}, {3.0, 1, 3}};
    const struct {
        double p, ns, nw;
    } settings[] = {{1.0, 0.01, 1.0}, {3.0, 0.3, 2.5}};

    double worst = 0.0;
    int infeasible = 0;
    for (const auto& s : settings) {
        for (const auto& c : cases) {
            ProblemSpec spec;
            spec.variances.assign(c.K, 1.0);
            spec.subchannels = c.M;
            spec.power = s.p;
            spec.noise_strong = s.ns;
            spec.noise_weak = s.nw;
            spec = validate(std::move(spec));
            for (int i = 0; i <= 10; ++i) {
                for (int j = 0; j <= 10; ++j) {
                    MismatchParams p{1.0, c.alpha, i / 10.0, j / 10.0};
                    const bool contraction = c.alpha < 1.0;
                    const SchemePoint closed = contraction ? bc_point(p, s.p, s.ns, s.nw)
                                                           : be_point(p, s.p, s.ns, s.nw);
                    const LayeredParams sub =
                        contraction ? bc_substitution(p, s.p, s.ns, s.nw, c.K, c.M)
                                    : be_substitution(p, s.p, s.ns, s.nw, c.K, c.M);
                    if (!layered_feasible(spec, sub).feasible) {
                        ++infeasible;
                        continue;
                    }
                    const SchemePoint via = layered_evaluate(spec, sub);
                    worst = std::max(worst, detail::rel_diff(via.d_s, closed.d_s));
                    worst = std::max(worst, detail::rel_diff(via.d_w, closed.d_w));
                }
            }
        }
    }
    res.seconds = timer.seconds();
    res.pass = infeasible == 0 && worst <= 1e-10 && res.seconds < 5.0;
    std::ostringstream os;
    os << "max rel err " << worst << ", infeasible " << infeasible;
    res.detail = os.str();
    return res;
}

/// The general evaluator fed with the two extreme-point parameter sets must
/// reproduce the dedicated extreme evaluators to 1e-12 relative.
inline CheckResult check_extreme_point_identities() {
    detail::Timer timer;
    CheckResult res{"extreme-point-identities", true, "", 0.0};
    detail::Rand r(0x5eed0001ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ProblemSpec spec = detail::random_spec(r, 4, /*square=*/true, /*white=*/false);
        const SchemePoint weak = weak_user_optimal(spec);
        const SchemePoint via_weak = layered_evaluate(spec, weak_optimal_params(spec));
        const SchemePoint strong = strong_user_optimal(spec);
        const SchemePoint via_strong = layered_evaluate(spec, strong_optimal_params(spec));
        worst = std::max({worst, detail::rel_diff(weak.d_s, via_weak.d_s),
                          detail::rel_diff(weak.d_w, via_weak.d_w),
                          detail::rel_diff(strong.d_s, via_strong.d_s),
                          detail::rel_diff(strong.d_w, via_strong.d_w)});
    }
    res.seconds = timer.seconds();
    res.pass = worst <= 1e-12;
    std::ostringstream os;
    os << "max rel err " << worst << " over 100 random specs";
    res.detail = os.str();
    return res;
}

/// Frontier behaviour at the three white-source reference settings: the
/// point-to-point outer bound holds, the frontier endpoints reach both
/// optima within 0.2%, and the best separation sweep is weakly dominated.
inline CheckResult check_white_source_frontier() {
    detail::Timer timer;
    CheckResult res{"white-source-frontier", true, "", 0.0};
    std::ostringstream os;
    bool ok = true;
    for (const auto& fs : detail::figure_settings()) {
        const double p = 1.0, nw = 1.0, ns = fs.noise_strong;
        const double ds_star = std::pow(1.0 + p / ns, -fs.alpha);
        const double dw_star = std::pow(1.0 + p / nw, -fs.alpha);
        const auto frontier = mismatch_frontier(1.0, p, ns, nw, fs.alpha, 201);

        double min_ds = frontier.front().d_s, min_dw = frontier.back().d_w;
        for (const auto& pt : frontier) {
            if (pt.d_s < ds_star * (1.0 - 1e-12) || pt.d_w < dw_star * (1.0 - 1e-12)) ok = false;
            min_ds = std::min(min_ds, pt.d_s);
            min_dw = std::min(min_dw, pt.d_w);
        }
        if (!(min_dw <= dw_star * 1.002) || !(min_ds <= ds_star * 1.002)) ok = false;

        ProblemSpec spec;
        spec.variances.assign(fs.K, 1.0);
        spec.subchannels = fs.M;
        spec.power = p;
        spec.noise_strong = ns;
        spec.noise_weak = nw;
        spec = validate(std::move(spec));
        int undominated = 0;
        for (int i = 0; i < 201; ++i) {
            const SchemePoint sep = separation_point(spec, SeparationParams{i / 200.0});
            if (!detail::dominated_by(frontier, sep.d_s, sep.d_w, 1e-12)) ++undominated;
        }
        if (undominated > 0) ok = false;
        os << "alpha " << fs.alpha << ": endpoint gaps " << detail::rel_diff(min_dw, dw_star)
           << "/" << detail::rel_diff(min_ds, ds_star) << ", undominated " << undominated << "; ";
    }
    res.seconds = timer.seconds();
    res.pass = ok && res.seconds < 10.0;
    res.detail = os.str();
    return res;
}

/// The strong-user-optimal gap over the earlier hybrid proposal is strictly
/// positive everywhere and negligible at the high-SNR reference settings.
inline CheckResult check_gap_formulas() {
    detail::Timer timer;
    CheckResult res{"reference-gap-formulas", true, "", 0.0};
    detail::Rand r(0x5eed0002ULL);
    bool ok = true;
    double min_gap = 1e300;
    for (int trial = 0; trial < 1000; ++trial) {
        const double sigma2 = r.log_uniform(0.1, 10.0);
        const double p = r.log_uniform(0.1, 100.0);
        const double n1 = r.log_uniform(0.01, 10.0), n2 = r.log_uniform(0.01, 10.0);
        double alpha = r.log_uniform(0.2, 4.0);
        if (std::abs(alpha - 1.0) < 0.05) alpha = alpha < 1.0 ? 0.9 : 1.1;
        const double gap =
            mp_gap_strong_opt(sigma2, p, std::min(n1, n2), std::max(n1, n2), alpha);
        min_gap = std::min(min_gap, gap);
        if (!(gap > 0.0)) ok = false;
    }
    // 20 dB settings: gap small relative to the achieved weak distortion at
    // the strong-user-optimal point.
    double worst_ratio = 0.0;
    for (const auto& fs : detail::figure_settings()) {
        if (fs.noise_strong != 0.01) continue;
        const double p = 1.0, nw = 1.0, ns = fs.noise_strong;
        const double gap = mp_gap_strong_opt(1.0, p, ns, nw, fs.alpha);
        double dw_at_strong_opt;
        if (fs.alpha < 1.0) {
            const double gs = (std::pow(ns, fs.alpha) * std::pow(p + ns, 1.0 - fs.alpha) - ns) / p;
            dw_at_strong_opt = bc_point(MismatchParams{1.0, fs.alpha, 1.0, gs}, p, ns, nw).d_w;
        } else {
            dw_at_strong_opt =
                be_point(MismatchParams{1.0, fs.alpha, 1.0, 1.0 / fs.alpha}, p, ns, nw).d_w;
        }
        worst_ratio = std::max(worst_ratio, gap / dw_at_strong_opt);
    }
    if (!(worst_ratio < 0.05)) ok = false;
    res.seconds = timer.seconds();
    res.pass = ok;
    std::ostringstream os;
    os << "min gap " << min_gap << ", worst gap/D_w " << worst_ratio;
    res.detail = os.str();
    return res;
}

/// Separation at the canonical power split stays within the bandwidth-ratio
/// gap bound for white sources, and both one-bit rate conditions hold.
inline CheckResult check_separation_gap_bound() {
    detail::Timer timer;
    CheckResult res{"separation-one-bit-bound", true, "", 0.0};
    detail::Rand r(0x5eed0003ULL);
    bool ok = true;
    double worst_margin = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        const ProblemSpec spec = detail::random_spec(r, 4, /*square=*/false, /*white=*/true);
        const auto gap = separation_optimality_gap(spec);
        const double bound = static_cast<double>(spec.subchannels) / spec.source_components();
        worst_margin = std::min({worst_margin, bound - gap.gap_strong_bits,
                                 bound - gap.gap_weak_bits});
        if (gap.gap_strong_bits > bound + 1e-12 || gap.gap_weak_bits > bound + 1e-12) ok = false;

        // One-bit conditions at beta_bar, rates in bits per channel use.
        const double p = spec.power, ns = spec.noise_strong, nw = spec.noise_weak;
        const double b = gap.beta;
        const double rw = 0.5 * std::log2(1.0 + (1.0 - b) * p / (b * p + nw));
        const double rs = rw + 0.5 * std::log2(1.0 + b * p / ns);
        const double rw_star = 0.5 * std::log2(1.0 + p / nw);
        const double rs_star = 0.5 * std::log2(1.0 + p / ns);
        if (rw + 1.0 < rw_star - 1e-12 || rs + 1.0 < rs_star - 1e-12) ok = false;
    }
    res.seconds = timer.seconds();
    res.pass = ok;
    std::ostringstream os;
    os << "smallest bound margin " << worst_margin << " bits over 200 white specs";
    res.detail = os.str();
    return res;
}

/// High-power uncoded-versus-digital ratio approaches its arithmetic/
/// geometric-mean limit; exactly 1 for white sources.
inline CheckResult check_analog_digital_asymptote() {
    detail::Timer timer;
    CheckResult res{"analog-digital-asymptote", true, "", 0.0};
    const auto skewed = analog_digital_ratio({1.0, 0.04}, 1e8, 1.0);
    const auto white = analog_digital_ratio({1.0, 1.0}, 1e8, 1.0);
    const double err_skewed = detail::rel_diff(skewed.finite_ratio, 1.8);
    const double err_white = detail::rel_diff(white.finite_ratio, 1.0);
    res.pass = detail::rel_diff(skewed.asymptotic, 1.8) < 1e-12 && err_skewed < 0.005 &&
               white.asymptotic == 1.0 && err_white < 0.005;
    res.seconds = timer.seconds();
    std::ostringstream os;
    os << "skewed ratio " << skewed.finite_ratio << " (limit 1.8), white ratio "
       << white.finite_ratio;
    res.detail = os.str();
    return res;
}

/// Water-filling precision and structure over random instances: achieved
/// rate to 1e-12 relative, distortions monotone in rate, scale covariance.
inline CheckResult check_water_filling() {
    detail::Timer timer;
    CheckResult res{"water-filling-precision", true, "", 0.0};
    detail::Rand r(0x5eed0004ULL);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int k = r.int_in(1, 8);
        std::vector<double> variances(k);
        for (double& v : variances) v = r.log_uniform(0.01, 10.0);
        const double rate = r.log_uniform(0.02, 20.0);

        const WaterfillResult a = reverse_waterfill(variances, rate);
        worst = std::max(worst, std::abs(a.total_rate - rate) / rate);
        if (std::abs(a.total_rate - rate) > 1e-12 * rate) ok = false;

        const WaterfillResult b = reverse_waterfill(variances, rate * 1.3);
        for (int i = 0; i < k; ++i)
            if (b.distortions[i] > a.distortions[i] * (1.0 + 1e-12)) ok = false;

        const double c = r.log_uniform(0.05, 20.0);
        std::vector<double> scaled(variances);
        for (double& v : scaled) v *= c;
        const WaterfillResult s = reverse_waterfill(scaled, rate);
        if (detail::rel_diff(s.mu, c * a.mu) > 1e-12) ok = false;
        for (int i = 0; i < k; ++i)
            if (detail::rel_diff(s.distortions[i], c * a.distortions[i]) > 1e-12) ok = false;
    }
    res.seconds = timer.seconds();
    res.pass = ok;
    std::ostringstream os;
    os << "max rate rel err " << worst << " over 500 instances";
    res.detail = os.str();
    return res;
}

/// Full signal-level suite at n = 1e6: every simulated chain matches its
/// closed form within max(1%, 4 SE), bit-identical across reruns and across
/// worker counts.
inline CheckResult check_monte_carlo(int workers = 1) {
    detail::Timer timer;
    CheckResult res{"monte-carlo-validation", true, "", 0.0};
    const std::uint64_t n = 1000000, seed = 12345;
    McConfig cfg;
    cfg.workers = workers;
    bool ok = true;
    std::ostringstream os;

    // Every reported distortion must match its reference, the per-component
    // diagnostics included.
    auto components_ok = [&cfg](const McReport& r) {
        for (std::size_t k = 0; k < r.component_ds.size(); ++k) {
            if (!hdabc::detail::mc_pass(r.component_ds[k], r.component_ds_ref[k],
                                        r.component_ds_stderr[k], cfg))
                return false;
            if (!hdabc::detail::mc_pass(r.component_dw[k], r.component_dw_ref[k],
                                        r.component_dw_stderr[k], cfg))
                return false;
        }
        for (std::size_t k = 0; k < r.side_info_mse.size(); ++k)
            if (!hdabc::detail::mc_pass(r.side_info_mse[k], r.side_info_ref[k],
                                        r.side_info_stderr[k], cfg))
                return false;
        return true;
    };

    const McReport unc = simulate_uncoded(1.0, 1.0, 1.0, n, seed, cfg);
    ok = ok && unc.pass;
    os << "uncoded " << (unc.pass ? "ok" : "FAIL") << "; ";

    ProblemSpec spec2;
    spec2.variances = {1.0, 0.25};
    spec2.subchannels = 2;
    spec2.power = 1.0;
    spec2.noise_strong = 0.1;
    spec2.noise_weak = 1.0;
    spec2 = validate(std::move(spec2));

    const McReport weak = simulate_weak_opt_chain(spec2, n, seed, cfg);
    ok = ok && weak.pass && components_ok(weak);
    os << "weak-chain " << (weak.pass ? "ok" : "FAIL") << "; ";
    const McReport strong = simulate_strong_opt_chain(spec2, n, seed, cfg);
    ok = ok && strong.pass && components_ok(strong);
    os << "strong-chain " << (strong.pass ? "ok" : "FAIL") << "; ";

    const McReport gen_weak = simulate_general_chain(spec2, weak_optimal_params(spec2), n, seed, cfg);
    const McReport gen_strong =
        simulate_general_chain(spec2, strong_optimal_params(spec2), n, seed, cfg);
    ok = ok && gen_weak.pass && gen_strong.pass && components_ok(gen_weak) &&
         components_ok(gen_strong);
    os << "general(extremes) " << (gen_weak.pass && gen_strong.pass ? "ok" : "FAIL") << "; ";

    // Bandwidth-contraction substitution point, checked against the closed form.
    ProblemSpec spec_bc;
    spec_bc.variances = {1.0, 1.0};
    spec_bc.subchannels = 1;
    spec_bc.power = 1.0;
    spec_bc.noise_strong = 0.01;
    spec_bc.noise_weak = 1.0;
    spec_bc = validate(std::move(spec_bc));
    const MismatchParams mp{1.0, 0.5, 0.5, 0.5};
    const McReport gen_bc = simulate_general_chain(
        spec_bc, bc_substitution(mp, 1.0, 0.01, 1.0, 2, 1), n, seed, cfg);
    const SchemePoint bc_ref = bc_point(mp, 1.0, 0.01, 1.0);
    const bool bc_ok = gen_bc.pass && components_ok(gen_bc) &&
                       hdabc::detail::mc_pass(gen_bc.empirical_ds, bc_ref.d_s, gen_bc.stderr_ds, cfg) &&
                       hdabc::detail::mc_pass(gen_bc.empirical_dw, bc_ref.d_w, gen_bc.stderr_dw, cfg);
    ok = ok && bc_ok;
    os << "general(bc) " << (bc_ok ? "ok" : "FAIL") << "; ";

    // Determinism: rerun, and rerun with a different worker count.
    McConfig cfg_alt = cfg;
    cfg_alt.workers = workers == 1 ? 3 : 1;
    const McReport again = simulate_weak_opt_chain(spec2, n, seed, cfg);
    const McReport alt = simulate_weak_opt_chain(spec2, n, seed, cfg_alt);
    const bool deterministic = again.empirical_ds == weak.empirical_ds &&
                               again.empirical_dw == weak.empirical_dw &&
                               again.stderr_ds == weak.stderr_ds &&
                               alt.empirical_ds == weak.empirical_ds &&
                               alt.empirical_dw == weak.empirical_dw &&
                               alt.stderr_ds == weak.stderr_ds;
    ok = ok && deterministic;
    os << "determinism " << (deterministic ? "ok" : "FAIL");

    res.seconds = timer.seconds();
    res.pass = ok && res.seconds < 60.0;
    res.detail = os.str();
    return res;
}

inline std::vector<CheckResult> run_analytic_checks() {
    return {check_substitution_bridge(), check_extreme_point_identities(),
            check_white_source_frontier(), check_gap_formulas(),
            check_separation_gap_bound(), check_analog_digital_asymptote(),
            check_water_filling()};
}

inline std::vector<CheckResult> run_mc_checks(int workers = 1) {
    return {check_monte_carlo(workers)};
}

inline std::vector<CheckResult> run_all_checks(int workers = 1) {
    auto all = run_analytic_checks();
    auto mc = run_mc_checks(workers);
    all.insert(all.end(), mc.begin(), mc.end());
    return all;
}

}  // namespace hdabc::checks
