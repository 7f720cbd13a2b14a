#include <doctest.h>

#include <random>
#include <vector>

#include "hdabc/frontier.hpp"

using namespace hdabc;

namespace {

SchemePoint pt(double ds, double dw) { return SchemePoint{ds, dw, Scheme::general, {}}; }

// O(n^2) reference dominance filter.
std::vector<SchemePoint> brute_force_front(const std::vector<SchemePoint>& points) {
    std::vector<SchemePoint> out;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (q.d_s <= p.d_s && q.d_w <= p.d_w && (q.d_s < p.d_s || q.d_w < p.d_w)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) {
            bool dup = false;
            for (const auto& kept : out)
                if (kept.d_s == p.d_s && kept.d_w == p.d_w) dup = true;
            if (!dup) out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const SchemePoint& a, const SchemePoint& b) { return a.d_s < b.d_s; });
    return out;
}

}  // namespace

TEST_CASE("pareto_filter keeps incomparable points") {
    const auto out = pareto_filter({pt(1, 2), pt(2, 1)});
    REQUIRE(out.size() == 2);
    CHECK(out[0].d_s == 1);
    CHECK(out[1].d_s == 2);
}

TEST_CASE("pareto_filter drops dominated points") {
    const auto out = pareto_filter({pt(1, 2), pt(1, 3)});
    REQUIRE(out.size() == 1);
    CHECK(out[0].d_w == 2);
}

TEST_CASE("pareto_filter deduplicates exact ties") {
    const auto out = pareto_filter({pt(1, 2), pt(1, 2), pt(1, 2)});
    CHECK(out.size() == 1);
}

TEST_CASE("pareto_filter rejects bad coordinates") {
    CHECK_THROWS_AS(pareto_filter({pt(0.0, 1.0)}), std::invalid_argument);
    CHECK_THROWS_AS(pareto_filter({pt(1.0, std::numeric_limits<double>::infinity())}),
                    std::invalid_argument);
}

TEST_CASE("pareto_filter matches brute force on random clouds") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    std::vector<SchemePoint> points;
    points.reserve(10000);
    for (int i = 0; i < 10000; ++i) points.push_back(pt(unif(gen), unif(gen)));

    const auto fast = pareto_filter(points);
    const auto slow = brute_force_front(points);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
        CHECK(fast[i].d_s == slow[i].d_s);
        CHECK(fast[i].d_w == slow[i].d_w);
    }
}

TEST_CASE("pareto_filter is idempotent and internally non-dominated") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    std::vector<SchemePoint> points;
    for (int i = 0; i < 500; ++i) points.push_back(pt(unif(gen), unif(gen)));
    const auto once = pareto_filter(points);
    const auto twice = pareto_filter(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i)
        for (std::size_t j = 0; j < once.size(); ++j)
            if (i != j)
                CHECK_FALSE((once[i].d_s <= once[j].d_s && once[i].d_w <= once[j].d_w &&
                             (once[i].d_s < once[j].d_s || once[i].d_w < once[j].d_w)));
}

TEST_CASE("hull retains both of two incomparable points") {
    const auto out = hull_with_timesharing({pt(1, 2), pt(2, 1)});
    CHECK(out.size() == 2);
}

TEST_CASE("hull retains collinear middle points") {
    const auto out = hull_with_timesharing({pt(1, 3), pt(2, 2), pt(3, 1)});
    CHECK(out.size() == 3);
}

TEST_CASE("hull rejects empty input") {
    CHECK_THROWS_AS(hull_with_timesharing({}), std::invalid_argument);
}

TEST_CASE("hull vertices match an exhaustive convexity check") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    std::vector<SchemePoint> points;
    for (int i = 0; i < 400; ++i) points.push_back(pt(unif(gen), unif(gen)));

    const auto front = pareto_filter(points);
    const auto hull = hull_with_timesharing(points);

    // Hull points are a subset of the front.
    for (const auto& h : hull) {
        bool found = false;
        for (const auto& f : front)
            if (f.d_s == h.d_s && f.d_w == h.d_w) found = true;
        CHECK(found);
    }
    // Consecutive segments have non-decreasing slope (convex boundary).
    for (std::size_t i = 2; i < hull.size(); ++i) {
        const double s1 = (hull[i - 1].d_w - hull[i - 2].d_w) / (hull[i - 1].d_s - hull[i - 2].d_s);
        const double s2 = (hull[i].d_w - hull[i - 1].d_w) / (hull[i].d_s - hull[i - 1].d_s);
        CHECK(s2 >= s1 - 1e-12);
    }
    // No front point lies strictly below the hull's lower boundary.
    for (const auto& f : front) {
        for (std::size_t i = 1; i < hull.size(); ++i) {
            const auto& a = hull[i - 1];
            const auto& b = hull[i];
            if (f.d_s >= a.d_s && f.d_s <= b.d_s && b.d_s > a.d_s) {
                const double t = (f.d_s - a.d_s) / (b.d_s - a.d_s);
                const double boundary = a.d_w + t * (b.d_w - a.d_w);
                CHECK(f.d_w >= boundary - 1e-9);
            }
        }
    }
}
