#include <doctest.h>

#include <algorithm>
#include <random>

#include "hdabc/model.hpp"

using namespace hdabc;

namespace {

ProblemSpec make_spec(std::vector<double> variances, int m, double p, double ns, double nw) {
    ProblemSpec spec;
    spec.variances = std::move(variances);
    spec.subchannels = m;
    spec.power = p;
    spec.noise_strong = ns;
    spec.noise_weak = nw;
    return spec;
}

}  // namespace

TEST_CASE("validate sorts variances non-increasing") {
    const ProblemSpec spec = validate(make_spec({0.25, 1.0}, 2, 1.0, 0.5, 1.0));
    CHECK(spec.variances == std::vector<double>{1.0, 0.25});
}

TEST_CASE("validate allows equal noises") {
    CHECK_NOTHROW(validate(make_spec({1.0}, 1, 1.0, 1.0, 1.0)));
}

TEST_CASE("validate rejects inverted noise order") {
    CHECK_THROWS_AS(validate(make_spec({1.0}, 1, 1.0, 2.0, 1.0)), NoiseOrderViolation);
}

TEST_CASE("validate rejects non-positive parameters") {
    CHECK_THROWS_AS(validate(make_spec({1.0, 0.0}, 1, 1.0, 0.5, 1.0)), NonPositiveParameter);
    CHECK_THROWS_AS(validate(make_spec({1.0}, 1, 0.0, 0.5, 1.0)), NonPositiveParameter);
    CHECK_THROWS_AS(validate(make_spec({1.0}, 1, 1.0, -0.5, 1.0)), NonPositiveParameter);
    CHECK_THROWS_AS(validate(make_spec({1.0}, 0, 1.0, 0.5, 1.0)), NonPositiveParameter);
    CHECK_THROWS_AS(validate(make_spec({}, 1, 1.0, 0.5, 1.0)), NonPositiveParameter);
}

TEST_CASE("validate is idempotent and preserves the variance multiset") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.01, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> variances(1 + trial % 6);
        for (double& v : variances) v = unif(gen);
        ProblemSpec spec = make_spec(variances, 2, 1.0, 0.5, 1.0);

        const ProblemSpec once = validate(spec);
        const ProblemSpec twice = validate(once);
        CHECK(once.variances == twice.variances);

        std::sort(variances.begin(), variances.end());
        std::vector<double> sorted = once.variances;
        std::sort(sorted.begin(), sorted.end());
        CHECK(variances == sorted);
        CHECK(std::is_sorted(once.variances.begin(), once.variances.end(),
                             std::greater<double>()));
    }
}
