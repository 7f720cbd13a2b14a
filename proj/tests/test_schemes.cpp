#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hdabc/schemes.hpp"

using namespace hdabc;
using doctest::Approx;

namespace {

ProblemSpec make_spec(std::vector<double> variances, int m, double p, double ns, double nw) {
    ProblemSpec spec;
    spec.variances = std::move(variances);
    spec.subchannels = m;
    spec.power = p;
    spec.noise_strong = ns;
    spec.noise_weak = nw;
    return validate(std::move(spec));
}

// K = M = 1, unit-variance source, 20 dB / 0 dB: uncoded transmission is
// simultaneously optimal for both users.
const ProblemSpec goblick = make_spec({1.0}, 1, 1.0, 0.01, 1.0);

// K = M = 2 reference problem used throughout.
const ProblemSpec two_by_two = make_spec({1.0, 0.25}, 2, 1.0, 0.1, 1.0);

}  // namespace

TEST_CASE("weak_user_optimal reduces to uncoded transmission for K=M=1") {
    const SchemePoint pt = weak_user_optimal(goblick);
    CHECK(pt.d_s == Approx(1.0 / 101.0).epsilon(1e-12));
    CHECK(pt.d_w == Approx(0.5).epsilon(1e-12));
    CHECK(pt.scheme == Scheme::weak_opt);
}

TEST_CASE("strong_user_optimal reduces to uncoded transmission for K=M=1") {
    const SchemePoint pt = strong_user_optimal(goblick);
    CHECK(pt.d_s == Approx(1.0 / 101.0).epsilon(1e-12));
    CHECK(pt.d_w == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("equal noises collapse the weak-optimal point onto D_w*") {
    const ProblemSpec spec = make_spec({2.0, 1.0, 0.3}, 3, 1.5, 0.8, 0.8);
    const SchemePoint pt = weak_user_optimal(spec);
    CHECK(pt.d_s == Approx(pt.d_w).epsilon(1e-13));
    CHECK(pt.d_w ==
          Approx(point_to_point_optimum(spec, User::weak).total_distortion).epsilon(1e-13));
}

TEST_CASE("weak_user_optimal on the 2x2 reference problem") {
    // Hand evaluation: weak water-filling gives mu = 1/4, D = (1/4, 1/4);
    // L = 1 (variance ratio 4 >= 2), the second component's uncoded power
    // solves 1 = 1 + P'/N_w so P' = 0. The strong user's sum is
    // ((2/11)(1/4) + (1/4)) / 2.
    const SchemePoint pt = weak_user_optimal(two_by_two);
    CHECK(pt.d_w == Approx(0.25).epsilon(1e-12));
    CHECK(pt.d_s == Approx((2.0 / 11.0 * 0.25 + 0.25) / 2.0).epsilon(1e-12));
    CHECK(pt.d_s < pt.d_w);
}

TEST_CASE("strong_user_optimal on the 2x2 reference problem") {
    // Strong water-filling: mu = 0.5/11, both active, L = 1 (ratio 22 >= 11);
    // component 2 solves 5.5 = 1 + (1-P'')/(P''+0.1) so P'' = 0.1. The weak
    // user sees the strong-only codeword as interference:
    // D_w = (1/2)(1/2 + 0.25/(1 + 0.9/1.1)) = 0.31875.
    const SchemePoint pt = strong_user_optimal(two_by_two);
    CHECK(pt.d_s == Approx(0.5 / 11.0).epsilon(1e-12));
    CHECK(pt.d_w == Approx(0.31875).epsilon(1e-12));
    CHECK(pt.d_w < 0.625);  // strictly better than sending nothing useful
}

TEST_CASE("strong_user_optimal weak distortion tends to the variance mean as N_w grows") {
    const ProblemSpec spec = make_spec({1.0, 0.25}, 2, 1.0, 0.1, 1e12);
    const SchemePoint pt = strong_user_optimal(spec);
    CHECK(pt.d_w == Approx(spec.variance_mean()).epsilon(1e-10));
}

TEST_CASE("extreme parameter sets are feasible with zero slack on their binding rate") {
    for (const ProblemSpec& spec : {goblick, two_by_two}) {
        const auto weak_rep = layered_feasible(spec, weak_optimal_params(spec));
        CHECK(weak_rep.feasible);
        CHECK(std::abs(weak_rep.rate_slacks[0]) < 1e-12);  // common rate exactly consumed

        const auto strong_rep = layered_feasible(spec, strong_optimal_params(spec));
        CHECK(strong_rep.feasible);
        CHECK(std::abs(strong_rep.rate_slacks[1]) < 1e-12);  // refinement rate exactly consumed
    }
}

TEST_CASE("power budget violations are reported as negative slack") {
    LayeredParams q = weak_optimal_params(two_by_two);
    for (double& p : q.channel_power) p *= 1.01;
    const auto rep = layered_feasible(two_by_two, q);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.power_slack < 0.0);
}

TEST_CASE("layered_feasible rejects inconsistent list lengths") {
    LayeredParams q = weak_optimal_params(two_by_two);
    q.coarse_head.push_back(0.5);
    CHECK_THROWS_AS(layered_feasible(two_by_two, q), IndexRangeMismatch);
}

TEST_CASE("layered_evaluate reproduces both extreme evaluators") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> logv(std::log(0.01), std::log(10.0));
    std::uniform_real_distribution<double> logn(std::log(1e-3), std::log(1.0));
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 1 + trial % 4;
        std::vector<double> variances(k);
        for (double& v : variances) v = std::exp(logv(gen));
        const double n1 = std::exp(logn(gen)), n2 = std::exp(logn(gen));
        const ProblemSpec spec =
            make_spec(variances, k, 1.0, std::min(n1, n2), std::max(n1, n2));

        const SchemePoint weak = weak_user_optimal(spec);
        const SchemePoint via_weak = layered_evaluate(spec, weak_optimal_params(spec));
        CHECK(via_weak.d_s == Approx(weak.d_s).epsilon(1e-12));
        CHECK(via_weak.d_w == Approx(weak.d_w).epsilon(1e-12));

        const SchemePoint strong = strong_user_optimal(spec);
        const SchemePoint via_strong = layered_evaluate(spec, strong_optimal_params(spec));
        CHECK(via_strong.d_s == Approx(strong.d_s).epsilon(1e-12));
        CHECK(via_strong.d_w == Approx(strong.d_w).epsilon(1e-12));
    }
}

TEST_CASE("extreme identities hold under bandwidth mismatch") {
    // Contraction can leave active components beyond the sub-channel budget;
    // those ride the coded layers for both schemes, and the rate conditions
    // still balance exactly.
    std::mt19937_64 gen(33);
    std::uniform_real_distribution<double> logv(std::log(0.01), std::log(10.0));
    std::uniform_real_distribution<double> logn(std::log(1e-3), std::log(1.0));
    std::uniform_int_distribution<int> dim(1, 5);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = dim(gen), m = dim(gen);
        std::vector<double> variances(k);
        for (double& v : variances) v = std::exp(logv(gen));
        const double n1 = std::exp(logn(gen)), n2 = std::exp(logn(gen));
        const ProblemSpec spec =
            make_spec(variances, m, 1.0, std::min(n1, n2), std::max(n1, n2));

        const SchemePoint weak = weak_user_optimal(spec);
        const SchemePoint via_weak = layered_evaluate(spec, weak_optimal_params(spec));
        CHECK(via_weak.d_s == Approx(weak.d_s).epsilon(1e-12));
        CHECK(via_weak.d_w == Approx(weak.d_w).epsilon(1e-12));

        const SchemePoint strong = strong_user_optimal(spec);
        const SchemePoint via_strong = layered_evaluate(spec, strong_optimal_params(spec));
        CHECK(via_strong.d_s == Approx(strong.d_s).epsilon(1e-12));
        CHECK(via_strong.d_w == Approx(strong.d_w).epsilon(1e-12));

        CHECK(weak.d_w ==
              Approx(point_to_point_optimum(spec, User::weak).total_distortion).epsilon(1e-13));
        CHECK(strong.d_s ==
              Approx(point_to_point_optimum(spec, User::strong).total_distortion).epsilon(1e-13));
    }
}

TEST_CASE("layered_evaluate matches the worked 2x2 interior example") {
    // Independent chain evaluation with P = (1,1), P_2' = 0.5, P_2'' = 0.2:
    //   D_1' = 1/(1 + 0.5/1.5)            = 0.75
    //   D_1'' = D_1'/(1 + P_1/N_s)        = 0.75/11
    //   D_1 = D_1''/(1 + P_2''/N_s)       = 0.75/33
    //   D_2: 1 + (0.5-0.2)/(0.2+0.1) = 2  -> 0.125
    //   D_s = (0.75/33 + 0.125)/2,  D_w = (0.75/2 + 0.25/1.25)/2 = 0.2875
    LayeredParams q;
    q.L = 1;
    q.K_prime = 2;
    q.channel_power = {1.0, 1.0};
    q.private_power = {0.5};
    q.strong_code_power = {0.2};
    q.coarse_head = {0.75};
    q.side_info = {0.75 / 11.0};
    q.strong_distortion = {0.75 / 33.0, 0.125};
    q.coarse_tail = {};

    const auto rep = layered_feasible(two_by_two, q);
    REQUIRE(rep.feasible);
    CHECK(std::abs(rep.rate_slacks[0]) < 1e-12);
    CHECK(std::abs(rep.rate_slacks[1]) < 1e-12);

    const SchemePoint pt = layered_evaluate(two_by_two, q);
    CHECK(pt.d_s == Approx((0.75 / 33.0 + 0.125) / 2.0).epsilon(1e-12));
    CHECK(pt.d_w == Approx(0.2875).epsilon(1e-12));
    CHECK(pt.d_s <= pt.d_w);
}

TEST_CASE("layered_evaluate throws on infeasible parameters") {
    LayeredParams q = weak_optimal_params(two_by_two);
    q.strong_distortion[0] *= 0.5;  // demands refinement rate nobody carries
    CHECK_THROWS_AS(layered_evaluate(two_by_two, q), InfeasibleParams);
}

namespace {

const SchemePoint& best_scalarized(const std::vector<SchemePoint>& points, double w) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (w * points[i].d_s + (1 - w) * points[i].d_w <
            w * points[best].d_s + (1 - w) * points[best].d_w)
            best = i;
    return points[best];
}

}  // namespace

TEST_CASE("layered_optimize endpoints hit both extremes") {
    GridSpec grid;
    grid.points_per_axis = 7;
    const auto points = layered_optimize(two_by_two, 0.5, grid);
    REQUIRE(points.size() >= 3);  // interior trade-offs beyond the extremes

    const SchemePoint weak = weak_user_optimal(two_by_two);
    const SchemePoint strong = strong_user_optimal(two_by_two);
    CHECK(best_scalarized(points, 0.0).d_w == Approx(weak.d_w).epsilon(1e-12));
    CHECK(best_scalarized(points, 1.0).d_s == Approx(strong.d_s).epsilon(1e-12));

    // Non-domination of the returned set.
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j)
            if (i != j)
                CHECK_FALSE((points[i].d_s <= points[j].d_s && points[i].d_w <= points[j].d_w &&
                             (points[i].d_s < points[j].d_s || points[i].d_w < points[j].d_w)));
}

TEST_CASE("layered_optimize collapses to one point under equal noises") {
    const ProblemSpec spec = make_spec({1.0}, 1, 1.0, 1.0, 1.0);
    GridSpec grid;
    grid.points_per_axis = 9;
    const auto points = layered_optimize(spec, 0.5, grid);
    const double target = point_to_point_optimum(spec, User::weak).total_distortion;
    for (const auto& pt : points) {
        CHECK(pt.d_s == Approx(target).epsilon(1e-9));
        CHECK(pt.d_w == Approx(target).epsilon(1e-9));
    }
}

TEST_CASE("layered_optimize warns on coarse grids") {
    std::ostringstream warn;
    GridSpec grid;
    grid.points_per_axis = 2;
    grid.refine = false;
    layered_optimize(goblick, 0.5, grid, &warn);
    CHECK(warn.str().find("GridTooCoarse") != std::string::npos);
}

TEST_CASE("layered_optimize enforces the practical size bound") {
    const ProblemSpec big = make_spec(std::vector<double>(7, 1.0), 7, 1.0, 0.5, 1.0);
    CHECK_THROWS_AS(layered_optimize(big, 0.5, GridSpec{}), std::invalid_argument);
}

TEST_CASE("every scheme point keeps the strong user at least as good") {
    GridSpec grid;
    grid.points_per_axis = 5;
    std::vector<SchemePoint> pts = layered_optimize(two_by_two, 0.5, grid);
    pts.push_back(weak_user_optimal(two_by_two));
    pts.push_back(strong_user_optimal(two_by_two));
    const double ceiling = two_by_two.variance_mean();
    for (const auto& pt : pts) {
        CHECK(pt.d_s > 0.0);
        CHECK(pt.d_s <= pt.d_w * (1 + 1e-12));
        CHECK(pt.d_w <= ceiling * (1 + 1e-12));
    }
}
