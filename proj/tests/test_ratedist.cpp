#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hdabc/ratedist.hpp"

using namespace hdabc;
using doctest::Approx;

namespace {

// Independent oracle: closed-form water level by walking the active-set
// prefix. For j active components, mu_j = exp((sum_i<j ln v_i - 2R)/j);
// valid when v_{j+1} <= mu_j <= v_j.
WaterfillResult waterfill_closed_form(std::vector<double> variances, double rate) {
    std::sort(variances.begin(), variances.end(), std::greater<double>());
    const int k = static_cast<int>(variances.size());
    double mu = variances.front();
    if (rate > 0.0) {
        double log_sum = 0.0;
        for (int j = 1; j <= k; ++j) {
            log_sum += std::log(variances[j - 1]);
            const double cand = std::exp((log_sum - 2.0 * rate) / j);
            const bool below_prev = cand <= variances[j - 1];
            const bool above_next = (j == k) || cand >= variances[j];
            if (below_prev && above_next) {
                mu = cand;
                break;
            }
        }
    }
    WaterfillResult out;
    out.mu = mu;
    double dsum = 0.0;
    for (double v : variances) {
        out.distortions.push_back(std::min(mu, v));
        dsum += out.distortions.back();
    }
    out.total_distortion = dsum / k;
    out.total_rate = rate;
    return out;
}

}  // namespace

TEST_CASE("awgn_capacity basics") {
    CHECK(awgn_capacity(0.0, 1.0) == 0.0);
    CHECK(awgn_capacity(1.0, 1.0) == Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(awgn_capacity(99.0, 1.0) == Approx(0.5 * std::log(100.0)).epsilon(1e-14));
    CHECK_THROWS_AS(awgn_capacity(1.0, 0.0), NonPositiveNoise);
    CHECK_THROWS_AS(awgn_capacity(-1.0, 1.0), NonPositiveParameter);
}

TEST_CASE("gaussian_distortion_at_rate basics") {
    CHECK(gaussian_distortion_at_rate(1.0, 0.0) == 1.0);
    CHECK(gaussian_distortion_at_rate(1.0, 0.5 * std::log(2.0)) == Approx(0.5).epsilon(1e-14));
    CHECK(gaussian_distortion_at_rate(4.0, std::log(2.0)) == Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(gaussian_distortion_at_rate(1.0, -0.1), NegativeRate);
    CHECK_THROWS_AS(gaussian_distortion_at_rate(0.0, 0.1), NonPositiveParameter);
}

TEST_CASE("reverse_waterfill single component") {
    const auto r = reverse_waterfill({1.0}, 0.5 * std::log(2.0));
    CHECK(r.mu == Approx(0.5).epsilon(1e-13));
    CHECK(r.distortions[0] == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("reverse_waterfill symmetric components split rate equally") {
    const auto r = reverse_waterfill({1.0, 1.0}, std::log(2.0));
    CHECK(r.mu == Approx(0.5).epsilon(1e-13));
    CHECK(r.distortions[0] == Approx(0.5).epsilon(1e-13));
    CHECK(r.distortions[1] == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("reverse_waterfill keeps the small component inactive") {
    // Both-active hypothesis gives mu = 0.1 > 0.04, contradiction; the
    // single-active branch gives mu = 1/4.
    const auto r = reverse_waterfill({1.0, 0.04}, std::log(2.0));
    CHECK(r.mu == Approx(0.25).epsilon(1e-13));
    CHECK(r.distortions[0] == Approx(0.25).epsilon(1e-13));
    CHECK(r.distortions[1] == 0.04);
    CHECK(r.total_distortion == Approx(0.145).epsilon(1e-13));
}

TEST_CASE("reverse_waterfill zero rate returns the variances") {
    const auto r = reverse_waterfill({2.0, 1.0, 0.5}, 0.0);
    CHECK(r.mu == 2.0);
    CHECK(r.distortions == std::vector<double>{2.0, 1.0, 0.5});
    CHECK(r.total_rate == 0.0);
}

TEST_CASE("reverse_waterfill matches the closed-form oracle and its contracts") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> logv(std::log(0.01), std::log(10.0));
    std::uniform_real_distribution<double> logr(std::log(0.02), std::log(20.0));
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> variances(1 + trial % 7);
        for (double& v : variances) v = std::exp(logv(gen));
        std::sort(variances.begin(), variances.end(), std::greater<double>());
        const double rate = std::exp(logr(gen));

        const auto got = reverse_waterfill(variances, rate);
        const auto want = waterfill_closed_form(variances, rate);
        CHECK(got.mu == Approx(want.mu).epsilon(1e-12));
        for (std::size_t i = 0; i < variances.size(); ++i) {
            CHECK(got.distortions[i] == Approx(want.distortions[i]).epsilon(1e-12));
            CHECK(got.distortions[i] <= variances[i]);
        }
        CHECK(std::abs(got.total_rate - rate) <= 1e-12 * rate);
    }
}

TEST_CASE("reverse_waterfill distortions are monotone in rate") {
    const std::vector<double> variances{3.0, 1.0, 0.2};
    double prev_rate = 0.1;
    auto prev = reverse_waterfill(variances, prev_rate);
    for (double rate : {0.3, 0.9, 2.7, 8.1}) {
        const auto cur = reverse_waterfill(variances, rate);
        for (std::size_t i = 0; i < variances.size(); ++i)
            CHECK(cur.distortions[i] <= prev.distortions[i] * (1 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("reverse_waterfill scale covariance") {
    const std::vector<double> variances{2.0, 0.7, 0.1};
    const double rate = 1.7;
    const auto base = reverse_waterfill(variances, rate);
    for (double c : {0.125, 3.0, 40.0}) {
        std::vector<double> scaled(variances);
        for (double& v : scaled) v *= c;
        const auto got = reverse_waterfill(scaled, rate);
        CHECK(got.mu == Approx(c * base.mu).epsilon(1e-12));
        for (std::size_t i = 0; i < variances.size(); ++i)
            CHECK(got.distortions[i] == Approx(c * base.distortions[i]).epsilon(1e-12));
    }
}

TEST_CASE("point_to_point_optimum examples") {
    ProblemSpec spec;
    spec.variances = {1.0};
    spec.subchannels = 1;
    spec.power = 1.0;
    spec.noise_strong = 0.01;
    spec.noise_weak = 1.0;
    spec = validate(std::move(spec));
    CHECK(point_to_point_optimum(spec, User::weak).total_distortion == Approx(0.5).epsilon(1e-13));
    CHECK(point_to_point_optimum(spec, User::strong).total_distortion ==
          Approx(1.0 / 101.0).epsilon(1e-12));

    ProblemSpec two;
    two.variances = {1.0, 0.04};
    two.subchannels = 2;
    two.power = 1.0;
    two.noise_strong = 1.0;
    two.noise_weak = 1.0;
    two = validate(std::move(two));
    CHECK(point_to_point_optimum(two, User::weak).total_distortion == Approx(0.145).epsilon(1e-12));
}

TEST_CASE("point_to_point strong never worse than weak componentwise") {
    ProblemSpec spec;
    spec.variances = {2.0, 1.0, 0.3};
    spec.subchannels = 3;
    spec.power = 2.0;
    spec.noise_strong = 0.2;
    spec.noise_weak = 1.5;
    spec = validate(std::move(spec));
    const auto strong = point_to_point_optimum(spec, User::strong);
    const auto weak = point_to_point_optimum(spec, User::weak);
    for (std::size_t i = 0; i < spec.variances.size(); ++i)
        CHECK(strong.distortions[i] <= weak.distortions[i]);
}
