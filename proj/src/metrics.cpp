#include "qhgeo/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>

namespace qhgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_node_id(const MetricGraph& g, std::int32_t id, const char* what) {
    if (id < 0 || static_cast<std::size_t>(id) >= g.node_count()) {
        throw Error(ErrorCode::PreconditionViolation,
                    std::string(what) + " id " + std::to_string(id) + " outside the graph");
    }
}

void check_deform(const MetricGraph& g, const DeformSpec& spec) {
    if (!(std::isfinite(spec.epsilon) && spec.epsilon > 0.0)) {
        throw Error(ErrorCode::NonpositiveEpsilon,
                    "deformation epsilon must be > 0, got " + std::to_string(spec.epsilon));
    }
    check_node_id(g, spec.base_point, "deformation base");
}

// Per-arc weight table for the selected metric. inner and quasihyperbolic
// alias the graph's own arrays; deformed owns a table built from one
// quasihyperbolic sweep out of the base point.
struct ArcWeights {
    const double* data = nullptr;
    std::vector<double> owned;
};

// Deterministic binary-heap shortest path; (distance, node) pops give a fixed
// settle order. Stops once `target` is settled (pass -1 for a full table).
std::vector<double> dijkstra(const MetricGraph& g, const double* w, std::int32_t source,
                             std::int32_t target) {
    std::vector<double> dist(g.node_count(), kInf);
    using Item = std::pair<double, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<std::size_t>(source)] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[static_cast<std::size_t>(u)]) continue;  // stale entry
        if (u == target) break;
        for (std::size_t a = g.arc_begin(static_cast<std::size_t>(u));
             a < g.arc_end(static_cast<std::size_t>(u)); ++a) {
            const std::int32_t v = g.arc_to(a);
            const double nd = d + w[a];
            if (nd < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

ArcWeights arc_weights(const MetricGraph& g, const Metric& metric) {
    ArcWeights w;
    switch (metric.kind()) {
        case Metric::Kind::inner:
            w.data = g.arc_euclid_data();
            break;
        case Metric::Kind::quasihyperbolic:
            w.data = g.arc_qh_data();
            break;
        case Metric::Kind::deformed: {
            check_deform(g, metric.deform());
            const std::vector<double> base =
                dijkstra(g, g.arc_qh_data(), metric.deform().base_point, -1);
            w.owned.resize(g.arc_count());
            const double eps = metric.deform().epsilon;
            for (std::size_t u = 0; u < g.node_count(); ++u) {
                for (std::size_t a = g.arc_begin(u); a < g.arc_end(u); ++a) {
                    const std::size_t v = static_cast<std::size_t>(g.arc_to(a));
                    w.owned[a] = g.arc_qh_len(a) * std::exp(-eps * 0.5 * (base[u] + base[v]));
                }
            }
            w.data = w.owned.data();
            break;
        }
    }
    return w;
}

double unreachable_error(const MetricGraph& g, std::int32_t v) {
    throw Error(ErrorCode::UnreachableNode,
                "node " + std::to_string(v) + " unreachable among " +
                    std::to_string(g.node_count()) + " nodes; graph invariant violated");
}

double pair_distance(const MetricGraph& g, const Metric& metric, std::int32_t u, std::int32_t v) {
    if (u == v) return 0.0;
    if (u > v) std::swap(u, v);  // direction-independent result, bit for bit
    const ArcWeights w = arc_weights(g, metric);
    const double d = dijkstra(g, w.data, u, v)[static_cast<std::size_t>(v)];
    if (!(d < kInf)) return unreachable_error(g, v);
    return d;
}

}  // namespace

const char* Metric::name() const {
    switch (kind_) {
        case Kind::inner: return "inner";
        case Kind::quasihyperbolic: return "quasihyperbolic";
        case Kind::deformed: return "deformed";
    }
    return "inner";
}

std::string PathRecord::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-path/1";
    j["metric"] = metric == Metric::Kind::inner             ? "inner"
                  : metric == Metric::Kind::quasihyperbolic ? "quasihyperbolic"
                                                            : "deformed";
    if (metric == Metric::Kind::deformed) {
        j["epsilon"] = deform.epsilon;
        j["base_point"] = deform.base_point;
    }
    j["nodes"] = nodes;
    auto pts = nlohmann::ordered_json::array();
    for (const Vec2& p : points) pts.push_back({p.x(), p.y()});
    j["points"] = std::move(pts);
    j["deltas"] = deltas;
    j["euclid_chord"] = euclid_chord;
    j["inner_len"] = inner_len;
    j["qh_len"] = qh_len;
    return j.dump(2);
}

double inner_distance(const MetricGraph& graph, const Vec2& x, const Vec2& y) {
    return pair_distance(graph, Metric::inner(), graph.snap(x), graph.snap(y));
}

double quasihyperbolic_distance(const MetricGraph& graph, const Vec2& x, const Vec2& y) {
    return pair_distance(graph, Metric::quasihyperbolic(), graph.snap(x), graph.snap(y));
}

double deformed_distance(const MetricGraph& graph, const DeformSpec& spec, const Vec2& x,
                         const Vec2& y) {
    return pair_distance(graph, Metric::deformed(spec), graph.snap(x), graph.snap(y));
}

PathRecord geodesic(const MetricGraph& graph, const Vec2& x, const Vec2& y,
                    const Metric& metric) {
    const std::int32_t sx = graph.snap(x);
    const std::int32_t sy = graph.snap(y);
    PathRecord rec;
    rec.metric = metric.kind();
    if (metric.kind() == Metric::Kind::deformed) rec.deform = metric.deform();

    const ArcWeights w = arc_weights(graph, metric);
    // Distances TO the target (undirected weights, one sweep from sy). The
    // sweep may stop once sx settles: the walk below only ever reads values
    // that are final by then (each step strictly decreases to_target, and a
    // stale overestimate can never satisfy the equality test).
    const std::vector<double> to_target = dijkstra(graph, w.data, sy, sx);
    if (!(to_target[static_cast<std::size_t>(sx)] < kInf)) unreachable_error(graph, sx);

    // Greedy forward walk: at each node take the smallest-id neighbor that
    // stays on a shortest path. This realizes the lexicographically smallest
    // arg-min node sequence.
    std::int32_t cur = sx;
    rec.nodes.push_back(cur);
    while (cur != sy) {
        std::int32_t next = -1;
        for (std::size_t a = graph.arc_begin(static_cast<std::size_t>(cur));
             a < graph.arc_end(static_cast<std::size_t>(cur)); ++a) {
            const std::int32_t v = graph.arc_to(a);
            if (to_target[static_cast<std::size_t>(cur)] ==
                    w.data[a] + to_target[static_cast<std::size_t>(v)] &&
                (next < 0 || v < next)) {
                next = v;
            }
        }
        if (next < 0) unreachable_error(graph, cur);  // numerically impossible
        rec.nodes.push_back(next);
        cur = next;
    }

    rec.points.reserve(rec.nodes.size());
    rec.deltas.reserve(rec.nodes.size());
    for (const std::int32_t id : rec.nodes) {
        rec.points.push_back(graph.node(static_cast<std::size_t>(id)).p);
        rec.deltas.push_back(graph.node(static_cast<std::size_t>(id)).delta);
    }
    rec.euclid_chord = (rec.points.front() - rec.points.back()).norm();
    for (std::size_t i = 0; i + 1 < rec.nodes.size(); ++i) {
        const std::size_t u = static_cast<std::size_t>(rec.nodes[i]);
        for (std::size_t a = graph.arc_begin(u); a < graph.arc_end(u); ++a) {
            if (graph.arc_to(a) == rec.nodes[i + 1]) {
                rec.inner_len += graph.arc_euclid_len(a);
                rec.qh_len += graph.arc_qh_len(a);
                break;
            }
        }
    }
    return rec;
}

std::vector<double> distance_table(const MetricGraph& graph, const Metric& metric,
                                   std::int32_t source) {
    check_node_id(graph, source, "source");
    const ArcWeights w = arc_weights(graph, metric);
    return dijkstra(graph, w.data, source, -1);
}

double node_distance(const MetricGraph& graph, const Metric& metric, std::int32_t u,
                     std::int32_t v) {
    check_node_id(graph, u, "node");
    check_node_id(graph, v, "node");
    return pair_distance(graph, metric, u, v);
}

}  // namespace qhgeo
