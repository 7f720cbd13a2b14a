#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "hdabc/model.hpp"
#include "hdabc/ratedist.hpp"
#include "hdabc/schemes.hpp"

namespace hdabc {

// ---------------------------------------------------------------------------
// Counter-based random streams: every variate is a pure function of
// (seed, stream, counter), so parallel generation is reproducible no matter
// how batches are scheduled.
// ---------------------------------------------------------------------------

namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Uniform double in (0,1), never 0 or 1.
inline double uniform(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = mix64(key + 0x9e3779b97f4a7c15ULL * counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counter-indexed uniforms.
inline double normal(std::uint64_t key, std::uint64_t counter) {
    const double u1 = uniform(key, 2 * counter);
    const double u2 = uniform(key, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace rng

// ---------------------------------------------------------------------------
// Streaming moments
// ---------------------------------------------------------------------------

struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n) + static_cast<double>(o.n);
        const double d = o.mean - mean;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        mean += d * static_cast<double>(o.n) / total;
        n += o.n;
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct McConfig {
    double rel_tol = 0.01;
    double z_score = 4.0;
    int workers = 1;
    std::uint64_t batch_size = 65536;
};

/// Outcome of a simulation run: empirical distortions with standard errors
/// against their closed-form references, plus per-component diagnostics.
struct McReport {
    Scheme scheme = Scheme::general;
    std::uint64_t n = 0;
    double empirical_ds = 0.0, empirical_dw = 0.0;
    double stderr_ds = 0.0, stderr_dw = 0.0;
    double closedform_ds = 0.0, closedform_dw = 0.0;
    std::uint64_t seed = 0;
    bool pass = false;

    std::vector<double> component_ds, component_dw;          ///< empirical per-component MSE
    std::vector<double> component_ds_stderr, component_dw_stderr;
    std::vector<double> component_ds_ref, component_dw_ref;  ///< closed-form per-component MSE
    std::vector<double> side_info_mse, side_info_stderr;     ///< pre-refinement stage, components [0,L)
    std::vector<double> side_info_ref;
};

namespace detail {

inline bool mc_pass(double emp, double ref, double se, const McConfig& cfg) {
    return std::abs(emp - ref) <= std::max(cfg.rel_tol * ref, cfg.z_score * se);
}

/// Runs `body(sample_index, stats)` over all samples in fixed-size batches,
/// each batch filling its own accumulator row; rows merge in batch order so
/// the result is identical for any worker count.
template <typename Body>
inline std::vector<Welford> run_batched(std::uint64_t n, std::size_t nstats, const McConfig& cfg,
                                        Body&& body) {
    const std::uint64_t bsize = std::max<std::uint64_t>(1, cfg.batch_size);
    const std::uint64_t nbatches = (n + bsize - 1) / bsize;
    std::vector<std::vector<Welford>> rows(nbatches);

    auto run_batch = [&](std::uint64_t b) {
        std::vector<Welford> acc(nstats);
        const std::uint64_t end = std::min(n, (b + 1) * bsize);
        for (std::uint64_t i = b * bsize; i < end; ++i) body(i, acc);
        rows[b] = std::move(acc);
    };

    const int workers = std::max(1, cfg.workers);
    if (workers == 1 || nbatches <= 1) {
        for (std::uint64_t b = 0; b < nbatches; ++b) run_batch(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::uint64_t b = next.fetch_add(1); b < nbatches; b = next.fetch_add(1))
                    run_batch(b);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<Welford> total(nstats);
    for (std::uint64_t b = 0; b < nbatches; ++b)
        for (std::size_t s = 0; s < nstats; ++s) total[s].merge(rows[b][s]);
    return total;
}

}  // namespace detail

/// Uncoded point-to-point link: S scaled to power P, AWGN, LMMSE estimate.
/// Validates the closed form sigma^2 N/(P+N).
inline McReport simulate_uncoded(double sigma2, double power, double noise, std::uint64_t n,
                                 std::uint64_t seed, const McConfig& cfg = {}) {
    if (!(sigma2 > 0.0)) throw NonPositiveParameter("simulate_uncoded: sigma2 must be > 0");
    if (!(power >= 0.0)) throw NonPositiveParameter("simulate_uncoded: power must be >= 0");
    if (!(noise > 0.0)) throw NonPositiveNoise("simulate_uncoded: noise must be > 0");
    if (n < 10000) throw SpecError("simulate_uncoded: need n >= 1e4");

    const std::uint64_t key_s = rng::stream_key(seed, 0);
    const std::uint64_t key_z = rng::stream_key(seed, 1);
    const double s_sd = std::sqrt(sigma2);
    const double z_sd = std::sqrt(noise);
    const double tx = std::sqrt(power / sigma2);
    const double coef = std::sqrt(power * sigma2) / (power + noise);

    auto stats = detail::run_batched(n, 1, cfg, [&](std::uint64_t i, std::vector<Welford>& acc) {
        const double s = s_sd * rng::normal(key_s, i);
        const double y = tx * s + z_sd * rng::normal(key_z, i);
        const double err = s - coef * y;
        acc[0].add(err * err);
    });

    McReport rep;
    rep.scheme = Scheme::analog;
    rep.n = n;
    rep.seed = seed;
    rep.empirical_ds = rep.empirical_dw = stats[0].mean;
    rep.stderr_ds = rep.stderr_dw = stats[0].stderr_mean();
    rep.closedform_ds = rep.closedform_dw = sigma2 * noise / (power + noise);
    rep.pass = detail::mc_pass(rep.empirical_ds, rep.closedform_ds, rep.stderr_ds, cfg);
    return rep;
}

namespace detail {

/// Signal-level simulation of a layered parameter set. Analog stages are
/// simulated (uncoded transmissions, LMMSE estimators, strong-only codeword
/// power as Gaussian interference); digital stages are idealized: codewords
/// stripped error-free, the strong user's refinement applied as the
/// deterministic factor D_k/D''_k on the measured side-information error,
/// and coded-only components contributing their closed-form constants.
inline McReport simulate_layered(const ProblemSpec& spec, const LayeredParams& q,
                                 double closedform_ds, double closedform_dw, Scheme tag,
                                 std::uint64_t n, std::uint64_t seed, const McConfig& cfg) {
    const int K = spec.source_components();
    const int L = q.L, Kp = q.K_prime;
    const double ns = spec.noise_strong, nw = spec.noise_weak;
    const double zs_sd = std::sqrt(ns), zw_sd = std::sqrt(nw);

    // Precomputed per-component constants and stream keys.
    struct HeadC {
        double e_sd, tx, coef_s, coef_w, wz_scale;
        std::uint64_t k_aux, k_zs, k_zw;
    };
    struct MidC {
        double s_sd, w_sd, tx, coef_s, coef_w;
        std::uint64_t k_main, k_int, k_zs, k_zw;
    };
    std::vector<HeadC> head(L);
    std::vector<MidC> mid(Kp - L);
    std::vector<double> ref_s(K), ref_w(K);
    for (int k = 0; k < L; ++k) {
        const double dp = q.coarse_head[k], pk = q.channel_power[k];
        head[k].e_sd = std::sqrt(dp);
        head[k].tx = std::sqrt(pk / dp);
        head[k].coef_s = std::sqrt(pk * dp) / (pk + ns);
        head[k].coef_w = std::sqrt(pk * dp) / (pk + nw);
        head[k].wz_scale = q.strong_distortion[k] / q.side_info[k];
        head[k].k_aux = rng::stream_key(seed, 8 * k + 1);
        head[k].k_zs = rng::stream_key(seed, 8 * k + 3);
        head[k].k_zw = rng::stream_key(seed, 8 * k + 4);
        ref_s[k] = q.strong_distortion[k];
        ref_w[k] = dp / (1.0 + pk / nw);
    }
    for (int k = L; k < Kp; ++k) {
        const double v = spec.variances[k];
        const double code = q.strong_code_power[k - L];
        const double priv = q.private_power[k - L];
        MidC& c = mid[k - L];
        c.s_sd = std::sqrt(v);
        c.w_sd = std::sqrt(code);
        c.tx = std::sqrt((priv - code) / v);
        c.coef_s = std::sqrt((priv - code) * v) / (priv + ns);
        c.coef_w = std::sqrt((priv - code) * v) / (priv + nw);
        c.k_main = rng::stream_key(seed, 8 * k + 0);
        c.k_int = rng::stream_key(seed, 8 * k + 2);
        c.k_zs = rng::stream_key(seed, 8 * k + 3);
        c.k_zw = rng::stream_key(seed, 8 * k + 4);
        ref_s[k] = q.strong_distortion[k];
        ref_w[k] = v / (1.0 + (priv - code) / (code + nw));
    }
    for (int k = Kp; k < K; ++k) {
        ref_s[k] = q.strong_distortion[k];
        ref_w[k] = q.coarse_tail[k - Kp];
    }

    // Stats layout: [0] d_s, [1] d_w, [2..2+K) per-component strong,
    // [2+K..2+2K) per-component weak, [2+2K..2+2K+L) side-information stage.
    const std::size_t nstats = 2 + 2 * static_cast<std::size_t>(K) + L;
    auto stats = detail::run_batched(n, nstats, cfg, [&](std::uint64_t i, std::vector<Welford>& acc) {
        double sum_s = 0.0, sum_w = 0.0;
        for (int k = 0; k < L; ++k) {
            const HeadC& c = head[k];
            const double e = c.e_sd * rng::normal(c.k_aux, i);
            const double y_s = c.tx * e + zs_sd * rng::normal(c.k_zs, i);
            const double y_w = c.tx * e + zw_sd * rng::normal(c.k_zw, i);
            const double err_s = e - c.coef_s * y_s;
            const double err_w = e - c.coef_w * y_w;
            // The coarse reconstruction cancels in both error terms, so it
            // never needs to be drawn; the estimate is shat + LMMSE(e).
            const double strong_sq = c.wz_scale * err_s * err_s;
            const double weak_sq = err_w * err_w;
            acc[2 + k].add(strong_sq);
            acc[2 + K + k].add(weak_sq);
            acc[2 + 2 * K + k].add(err_s * err_s);
            sum_s += strong_sq;
            sum_w += weak_sq;
        }
        for (int k = L; k < Kp; ++k) {
            const MidC& c = mid[k - L];
            const double s = c.s_sd * rng::normal(c.k_main, i);
            const double w_int = c.w_sd * rng::normal(c.k_int, i);
            const double base = c.tx * s + w_int;
            const double err_s = s - c.coef_s * (base + zs_sd * rng::normal(c.k_zs, i));
            const double err_w = s - c.coef_w * (base + zw_sd * rng::normal(c.k_zw, i));
            acc[2 + k].add(err_s * err_s);
            acc[2 + K + k].add(err_w * err_w);
            sum_s += err_s * err_s;
            sum_w += err_w * err_w;
        }
        for (int k = Kp; k < K; ++k) {
            acc[2 + k].add(ref_s[k]);
            acc[2 + K + k].add(ref_w[k]);
            sum_s += ref_s[k];
            sum_w += ref_w[k];
        }
        acc[0].add(sum_s / K);
        acc[1].add(sum_w / K);
    });

    McReport rep;
    rep.scheme = tag;
    rep.n = n;
    rep.seed = seed;
    rep.empirical_ds = stats[0].mean;
    rep.empirical_dw = stats[1].mean;
    rep.stderr_ds = stats[0].stderr_mean();
    rep.stderr_dw = stats[1].stderr_mean();
    rep.closedform_ds = closedform_ds;
    rep.closedform_dw = closedform_dw;
    rep.component_ds.resize(K);
    rep.component_dw.resize(K);
    rep.component_ds_stderr.resize(K);
    rep.component_dw_stderr.resize(K);
    for (int k = 0; k < K; ++k) {
        rep.component_ds[k] = stats[2 + k].mean;
        rep.component_dw[k] = stats[2 + K + k].mean;
        rep.component_ds_stderr[k] = stats[2 + k].stderr_mean();
        rep.component_dw_stderr[k] = stats[2 + K + k].stderr_mean();
    }
    rep.component_ds_ref = std::move(ref_s);
    rep.component_dw_ref = std::move(ref_w);
    rep.side_info_mse.resize(L);
    rep.side_info_stderr.resize(L);
    rep.side_info_ref.assign(q.side_info.begin(), q.side_info.end());
    for (int k = 0; k < L; ++k) {
        rep.side_info_mse[k] = stats[2 + 2 * K + k].mean;
        rep.side_info_stderr[k] = stats[2 + 2 * K + k].stderr_mean();
    }
    rep.pass = detail::mc_pass(rep.empirical_ds, rep.closedform_ds, rep.stderr_ds, cfg) &&
               detail::mc_pass(rep.empirical_dw, rep.closedform_dw, rep.stderr_dw, cfg);
    return rep;
}

}  // namespace detail

/// Simulates the weak-user-optimal chain on a K = M = 2 problem and checks
/// it against the closed-form trade-off point.
inline McReport simulate_weak_opt_chain(const ProblemSpec& spec, std::uint64_t n,
                                        std::uint64_t seed, const McConfig& cfg = {}) {
    if (spec.source_components() != 2 || spec.subchannels != 2)
        throw ShapeMismatch("simulate_weak_opt_chain: requires K = M = 2");
    const SchemePoint ref = weak_user_optimal(spec);
    return detail::simulate_layered(spec, std::get<LayeredParams>(ref.params), ref.d_s, ref.d_w,
                                    Scheme::weak_opt, n, seed, cfg);
}

/// Simulates the strong-user-optimal chain on a K = M = 2 problem; the
/// Wyner-Ziv refinement is idealized analytically, every analog stage is
/// measured.
inline McReport simulate_strong_opt_chain(const ProblemSpec& spec, std::uint64_t n,
                                          std::uint64_t seed, const McConfig& cfg = {}) {
    if (spec.source_components() != 2 || spec.subchannels != 2)
        throw ShapeMismatch("simulate_strong_opt_chain: requires K = M = 2");
    const SchemePoint ref = strong_user_optimal(spec);
    return detail::simulate_layered(spec, std::get<LayeredParams>(ref.params), ref.d_s, ref.d_w,
                                    Scheme::strong_opt, n, seed, cfg);
}

/// Simulates an arbitrary feasible layered parameter set and checks it
/// against layered_evaluate.
inline McReport simulate_general_chain(const ProblemSpec& spec, const LayeredParams& params,
                                       std::uint64_t n, std::uint64_t seed,
                                       const McConfig& cfg = {}) {
    const SchemePoint ref = layered_evaluate(spec, params);  // throws InfeasibleParams
    return detail::simulate_layered(spec, params, ref.d_s, ref.d_w, Scheme::general, n, seed, cfg);
}

}  // namespace hdabc
