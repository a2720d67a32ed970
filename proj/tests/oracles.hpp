#pragma once

// Independent shortest-path oracle on a plain uniform lattice. Shares only
// the domain primitives with the production pipeline: no refinement, no
// corner dedup, no CSR. Used to cross-check graph distances.

#include "qhgeo/domain.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <utility>
#include <vector>

namespace qhgeo::oracle {

struct UniformLattice {
    std::vector<Vec2> points;
    std::vector<double> delta;
    std::vector<std::vector<std::pair<std::int32_t, double>>> inner_adj;
    std::vector<std::vector<std::pair<std::int32_t, double>>> qh_adj;
    std::map<std::pair<int, int>, std::int32_t> index;
    Vec2 origin;
    double h = 0.0;

    std::int32_t nearest(const Vec2& p) const {
        const int ci = static_cast<int>(std::lround((p.x() - origin.x()) / h));
        const int cj = static_cast<int>(std::lround((p.y() - origin.y()) / h));
        std::int32_t best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int dj = -2; dj <= 2; ++dj) {
            for (int di = -2; di <= 2; ++di) {
                const auto it = index.find({ci + di, cj + dj});
                if (it == index.end()) continue;
                const double d = (points[static_cast<std::size_t>(it->second)] - p).norm();
                if (d < best_d) {
                    best_d = d;
                    best = it->second;
                }
            }
        }
        return best;
    }
};

inline UniformLattice build_lattice(const DomainSpec& spec, double h) {
    UniformLattice lat;
    lat.h = h;
    const auto [lo, hi] = spec.bounding_box();
    lat.origin = lo;
    const int nx = static_cast<int>(std::floor((hi.x() - lo.x()) / h)) + 1;
    const int ny = static_cast<int>(std::floor((hi.y() - lo.y()) / h)) + 1;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const Vec2 p = lo + h * Vec2(i, j);
            if (!spec.contains(p)) continue;
            lat.index[{i, j}] = static_cast<std::int32_t>(lat.points.size());
            lat.points.push_back(p);
            lat.delta.push_back(spec.boundary_distance(p));
        }
    }
    const std::size_t n = lat.points.size();
    lat.inner_adj.resize(n);
    lat.qh_adj.resize(n);
    constexpr int kOff[8][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {-1, 0}, {0, -1}, {-1, -1}, {-1, 1}};
    for (const auto& [ij, u] : lat.index) {
        for (const auto& off : kOff) {
            const auto it = lat.index.find({ij.first + off[0], ij.second + off[1]});
            if (it == lat.index.end()) continue;
            const std::int32_t v = it->second;
            const std::size_t su = static_cast<std::size_t>(u);
            const std::size_t sv = static_cast<std::size_t>(v);
            if (!spec.segment_inside(lat.points[su], lat.points[sv])) continue;
            const double elen = (lat.points[su] - lat.points[sv]).norm();
            lat.inner_adj[su].push_back({v, elen});
            lat.qh_adj[su].push_back({v, elen * 0.5 * (1.0 / lat.delta[su] + 1.0 / lat.delta[sv])});
        }
    }
    return lat;
}

inline double lattice_distance(const UniformLattice& lat, bool qh, const Vec2& x, const Vec2& y) {
    const std::int32_t sx = lat.nearest(x);
    const std::int32_t sy = lat.nearest(y);
    if (sx < 0 || sy < 0) return std::numeric_limits<double>::quiet_NaN();
    const auto& adj = qh ? lat.qh_adj : lat.inner_adj;
    std::vector<double> dist(lat.points.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<std::size_t>(sx)] = 0.0;
    heap.push({0.0, sx});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[static_cast<std::size_t>(u)]) continue;
        if (u == sy) break;
        for (const auto& [v, w] : adj[static_cast<std::size_t>(u)]) {
            if (d + w < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = d + w;
                heap.push({d + w, v});
            }
        }
    }
    return dist[static_cast<std::size_t>(sy)];
}

/// One-call oracle: uniform lattice of spacing h, king-move edges, Dijkstra.
inline double grid_distance(const DomainSpec& spec, double h, bool qh, const Vec2& x,
                            const Vec2& y) {
    const UniformLattice lat = build_lattice(spec, h);
    return lattice_distance(lat, qh, x, y);
}

}  // namespace qhgeo::oracle
