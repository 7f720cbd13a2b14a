#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hdabc/model.hpp"

namespace hdabc {

/// Minimal non-dominated subset under joint (d_s, d_w) minimization, sorted
/// by ascending d_s; exact duplicates are deduplicated (first producer wins,
/// ties broken by the lexicographically smaller pair, which the sort
/// enforces). eps > 0 widens dominance for plot thinning only; the default
/// keeps exact semantics.
inline std::vector<SchemePoint> pareto_filter(std::vector<SchemePoint> points, double eps = 0.0) {
    for (const auto& p : points)
        if (!std::isfinite(p.d_s) || !std::isfinite(p.d_w) || !(p.d_s > 0.0) || !(p.d_w > 0.0))
            throw std::invalid_argument("pareto_filter: coordinates must be finite and positive");

    std::stable_sort(points.begin(), points.end(), [](const SchemePoint& a, const SchemePoint& b) {
        return a.d_s != b.d_s ? a.d_s < b.d_s : a.d_w < b.d_w;
    });

    std::vector<SchemePoint> kept;
    kept.reserve(points.size());
    for (auto& p : points) {
        if (!kept.empty()) {
            const SchemePoint& back = kept.back();
            if (p.d_s == back.d_s && p.d_w == back.d_w) continue;  // exact tie
            if (back.d_w <= p.d_w + eps) continue;                 // dominated
        }
        kept.push_back(std::move(p));
    }
    return kept;
}

/// Lower-left convex hull of the point set: the distortion pairs reachable
/// with time sharing between the kept vertices. Collinear boundary points
/// are retained. Input must be non-empty.
inline std::vector<SchemePoint> hull_with_timesharing(const std::vector<SchemePoint>& points) {
    if (points.empty())
        throw std::invalid_argument("hull_with_timesharing: empty point list");
    std::vector<SchemePoint> front = pareto_filter(points);
    if (front.size() <= 2) return front;

    std::vector<SchemePoint> hull;
    hull.reserve(front.size());
    for (const auto& q : front) {
        // Pop the stack top while it lies strictly above the chord to q.
        while (hull.size() >= 2) {
            const SchemePoint& a = hull[hull.size() - 2];
            const SchemePoint& b = hull.back();
            const double cross =
                (b.d_s - a.d_s) * (q.d_w - a.d_w) - (b.d_w - a.d_w) * (q.d_s - a.d_s);
            if (cross < 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(q);
    }
    return hull;
}

}  // namespace hdabc
