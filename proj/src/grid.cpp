#include "qhgeo/grid.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace qhgeo {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kSnapCells = 1.5;

struct Offset {
    int dx;
    int dy;
};

// Fixed emission order keeps edge discovery deterministic.
constexpr Offset kOffsets[16] = {
    {1, 0},  {-1, 0}, {0, 1},  {0, -1},                       // axis4
    {1, 1},  {1, -1}, {-1, 1}, {-1, -1},                      // king8
    {2, 1},  {2, -1}, {-2, 1}, {-2, -1},
    {1, 2},  {1, -2}, {-1, 2}, {-1, -2},                      // knight16
};

int stencil_offset_count(Stencil s) {
    switch (s) {
        case Stencil::axis4: return 4;
        case Stencil::king8: return 8;
        case Stencil::knight16: return 16;
    }
    return 8;
}

std::int64_t corner_key(std::int64_t ix, std::int64_t iy) { return (iy << 32) | ix; }

struct CornerInfo {
    std::int32_t id = -1;
    std::uint32_t depth_mask = 0;  // bit d set when a retained depth-d cell touches the corner
    float max_side = 0.0f;
};

void validate_params(const GridParams& params) {
    auto bad = [](const std::string& what) {
        throw Error(ErrorCode::MalformedSpec, "grid params: " + what);
    };
    if (!(std::isfinite(params.h_coarse) && params.h_coarse > 0.0)) bad("h_coarse must be > 0");
    if (!(params.whitney_c > 0.0 && params.whitney_c <= 1.0)) bad("whitney_c must be in (0, 1]");
    if (params.max_nodes < 2) bad("max_nodes must be at least 2");
    if (params.max_depth < 0 || params.max_depth > 20) bad("max_depth must be in [0, 20]");
}

}  // namespace

const char* stencil_name(Stencil s) {
    switch (s) {
        case Stencil::axis4: return "axis4";
        case Stencil::king8: return "king8";
        case Stencil::knight16: return "knight16";
    }
    return "king8";
}

Stencil stencil_from_name(const std::string& name) {
    if (name == "axis4") return Stencil::axis4;
    if (name == "king8") return Stencil::king8;
    if (name == "knight16") return Stencil::knight16;
    throw Error(ErrorCode::MalformedSpec, "unknown stencil '" + name + "'");
}

MetricGraph build_graph(const DomainSpec& spec, const GridParams& params) {
    validate_params(params);
    MetricGraph g(spec, params);

    const auto [lo, hi] = spec.bounding_box();
    const int maxd = params.max_depth;
    const double h_fine = params.h_coarse / static_cast<double>(std::int64_t{1} << maxd);
    const std::int64_t nx =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi.x() - lo.x()) / params.h_coarse - 1e-12)));
    const std::int64_t ny =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi.y() - lo.y()) / params.h_coarse - 1e-12)));
    if ((nx << maxd) >= (std::int64_t{1} << 31) || (ny << maxd) >= (std::int64_t{1} << 31)) {
        throw Error(ErrorCode::PreconditionViolation,
                    "lattice addressing overflow; raise h_coarse or lower max_depth");
    }

    struct Cell {
        std::int32_t depth;
        std::int32_t ix, iy;  // corner index in fine-lattice units
    };

    // Depth-first walk of the dyadic tree. A cell is kept once its side obeys
    // the gap cap, dropped when provably exterior or unable to produce a
    // retainable descendant.
    std::vector<Cell> retained;
    std::vector<Cell> stack;
    stack.reserve(1024);
    for (std::int64_t j = ny - 1; j >= 0; --j) {
        for (std::int64_t i = nx - 1; i >= 0; --i) {
            stack.push_back(Cell{0, static_cast<std::int32_t>(i << maxd), static_cast<std::int32_t>(j << maxd)});
        }
    }
    const double retain_floor = h_fine * (1.0 / params.whitney_c + kSqrtHalf);
    const std::int64_t walk_budget = 256 * std::max<std::int64_t>(params.max_nodes, 1024);
    std::int64_t visits = 0;

    while (!stack.empty()) {
        const Cell cell = stack.back();
        stack.pop_back();
        if (++visits > walk_budget) {
            throw Error(ErrorCode::NodeBudgetExceeded, "refinement walk exceeded node budget");
        }
        const std::int64_t span = std::int64_t{1} << (maxd - cell.depth);
        const double s = h_fine * static_cast<double>(span);
        const Vec2 corner = lo + h_fine * Vec2(cell.ix, cell.iy);
        const Vec2 center = corner + Vec2(0.5 * s, 0.5 * s);
        const double r = s * kSqrtHalf;
        const double gap = spec.boundary_set_distance(center);
        const bool inside = spec.contains(center);

        if (!inside && gap >= r) continue;  // whole cell exterior
        if (inside && s <= params.whitney_c * (gap - r)) {
            retained.push_back(cell);
            if (static_cast<std::int64_t>(retained.size()) > params.max_nodes) {
                throw Error(ErrorCode::NodeBudgetExceeded,
                            "retained cells exceed max_nodes = " + std::to_string(params.max_nodes));
            }
            continue;
        }
        if (cell.depth == maxd) continue;          // unresolved sliver, dropped
        if (gap + r < retain_floor) continue;      // no descendant can satisfy the cap
        const std::int32_t half = static_cast<std::int32_t>(span / 2);
        stack.push_back(Cell{cell.depth + 1, cell.ix, cell.iy});
        stack.push_back(Cell{cell.depth + 1, static_cast<std::int32_t>(cell.ix + half), cell.iy});
        stack.push_back(Cell{cell.depth + 1, cell.ix, static_cast<std::int32_t>(cell.iy + half)});
        stack.push_back(
            Cell{cell.depth + 1, static_cast<std::int32_t>(cell.ix + half), static_cast<std::int32_t>(cell.iy + half)});
    }

    // Nodes are the deduplicated corners of retained cells. Every such corner
    // is strictly interior: the cell center clears the boundary by more than
    // the cell circumradius.
    std::unordered_map<std::int64_t, CornerInfo> corners;
    corners.reserve(retained.size() * 2);
    for (const Cell& cell : retained) {
        const std::int64_t span = std::int64_t{1} << (maxd - cell.depth);
        const float side = static_cast<float>(h_fine * static_cast<double>(span));
        for (int c = 0; c < 4; ++c) {
            const std::int64_t ix = cell.ix + (c & 1 ? span : 0);
            const std::int64_t iy = cell.iy + (c & 2 ? span : 0);
            CornerInfo& info = corners[corner_key(ix, iy)];
            info.depth_mask |= 1u << cell.depth;
            info.max_side = std::max(info.max_side, side);
        }
        if (static_cast<std::int64_t>(corners.size()) > params.max_nodes) {
            throw Error(ErrorCode::NodeBudgetExceeded,
                        "node count exceeds max_nodes = " + std::to_string(params.max_nodes));
        }
    }
    if (corners.size() < 2) {
        throw Error(ErrorCode::DisconnectedGraph,
                    "fewer than 2 interior nodes retained; h_coarse too coarse for this domain");
    }

    // Row-major key order fixes node ids independently of walk order.
    std::vector<std::int64_t> keys;
    keys.reserve(corners.size());
    for (const auto& [key, info] : corners) keys.push_back(key);
    std::sort(keys.begin(), keys.end());

    const std::size_t n = keys.size();
    g.nodes_.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        CornerInfo& info = corners[keys[u]];
        info.id = static_cast<std::int32_t>(u);
        const std::int64_t ix = keys[u] & 0xffffffff;
        const std::int64_t iy = keys[u] >> 32;
        const Vec2 p = lo + h_fine * Vec2(ix, iy);
        g.nodes_[u] = MetricGraph::Node{p, spec.boundary_distance(p), info.max_side};
    }

    // Wire neighbors by probing the lattice at each incident cell size plus
    // two coarser sizes; the coarser probes stitch hanging nodes across level
    // transitions. Every accepted edge segment is verified inside the domain.
    const int offset_count = stencil_offset_count(params.neighbor_stencil);
    std::vector<std::vector<std::int32_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u) {
        const std::int64_t ix = keys[u] & 0xffffffff;
        const std::int64_t iy = keys[u] >> 32;
        const std::uint32_t incident = corners[keys[u]].depth_mask;
        const std::uint32_t probe_mask = incident | (incident >> 1) | (incident >> 2);
        for (int d = 0; d <= maxd; ++d) {
            if (!(probe_mask & (1u << d))) continue;
            const std::int64_t step = std::int64_t{1} << (maxd - d);
            for (int o = 0; o < offset_count; ++o) {
                const auto it = corners.find(corner_key(ix + kOffsets[o].dx * step, iy + kOffsets[o].dy * step));
                if (it == corners.end()) continue;
                const std::int32_t v = it->second.id;
                if (v < 0 || v == static_cast<std::int32_t>(u)) continue;
                if (std::find(adj[u].begin(), adj[u].end(), v) != adj[u].end()) continue;
                if (!spec.segment_inside(g.nodes_[u].p, g.nodes_[static_cast<std::size_t>(v)].p)) continue;
                adj[u].push_back(v);
                adj[static_cast<std::size_t>(v)].push_back(static_cast<std::int32_t>(u));
            }
        }
    }

    g.arc_offset_.assign(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u) {
        std::sort(adj[u].begin(), adj[u].end());
        g.arc_offset_[u + 1] = g.arc_offset_[u] + adj[u].size();
    }
    g.arc_to_.resize(g.arc_offset_[n]);
    g.arc_elen_.resize(g.arc_offset_[n]);
    g.arc_qlen_.resize(g.arc_offset_[n]);
    for (std::size_t u = 0; u < n; ++u) {
        std::size_t a = g.arc_offset_[u];
        for (const std::int32_t v : adj[u]) {
            const MetricGraph::Node& nu = g.nodes_[u];
            const MetricGraph::Node& nv = g.nodes_[static_cast<std::size_t>(v)];
            const double elen = (nu.p - nv.p).norm();
            g.arc_to_[a] = v;
            g.arc_elen_[a] = elen;
            g.arc_qlen_[a] = elen * 0.5 * (1.0 / nu.delta + 1.0 / nv.delta);
            ++a;
        }
    }

    // Single-component check (breadth-first from node 0).
    std::vector<char> seen(n, 0);
    std::vector<std::int32_t> queue = {0};
    seen[0] = 1;
    std::size_t reached = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t u = static_cast<std::size_t>(queue[head]);
        for (std::size_t a = g.arc_offset_[u]; a < g.arc_offset_[u + 1]; ++a) {
            const std::int32_t v = g.arc_to_[a];
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                queue.push_back(v);
            }
        }
    }
    if (reached != n) {
        std::ostringstream os;
        os << "retained nodes split into components (" << reached << " of " << n
           << " reachable); h_coarse or max_depth cannot resolve the narrowest gap";
        throw Error(ErrorCode::DisconnectedGraph, os.str());
    }

    // Bucket grid for nearest-node queries.
    g.bucket_origin_ = lo;
    g.bucket_side_ = params.h_coarse;
    g.buckets_x_ = static_cast<std::int32_t>(nx + 1);
    g.buckets_y_ = static_cast<std::int32_t>(ny + 1);
    const std::size_t nb = static_cast<std::size_t>(g.buckets_x_) * static_cast<std::size_t>(g.buckets_y_);
    auto bucket_of = [&g](const Vec2& p) {
        const std::int32_t bx = std::clamp(static_cast<std::int32_t>((p.x() - g.bucket_origin_.x()) / g.bucket_side_),
                                           0, g.buckets_x_ - 1);
        const std::int32_t by = std::clamp(static_cast<std::int32_t>((p.y() - g.bucket_origin_.y()) / g.bucket_side_),
                                           0, g.buckets_y_ - 1);
        return static_cast<std::size_t>(by) * static_cast<std::size_t>(g.buckets_x_) + static_cast<std::size_t>(bx);
    };
    g.bucket_offset_.assign(nb + 1, 0);
    for (std::size_t u = 0; u < n; ++u) ++g.bucket_offset_[bucket_of(g.nodes_[u].p) + 1];
    for (std::size_t b = 0; b < nb; ++b) g.bucket_offset_[b + 1] += g.bucket_offset_[b];
    g.bucket_node_.resize(n);
    std::vector<std::size_t> cursor(g.bucket_offset_.begin(), g.bucket_offset_.end() - 1);
    for (std::size_t u = 0; u < n; ++u) {
        g.bucket_node_[cursor[bucket_of(g.nodes_[u].p)]++] = static_cast<std::int32_t>(u);
    }

    return g;
}

MetricGraph refine(const MetricGraph& graph, double factor) {
    if (!(std::isfinite(factor) && factor > 1.0)) {
        throw Error(ErrorCode::PreconditionViolation, "refine factor must be > 1");
    }
    GridParams params = graph.params();
    params.h_coarse /= factor;
    return build_graph(graph.domain(), params);
}

std::pair<std::int32_t, double> MetricGraph::nearest_node(const Vec2& p) const {
    const std::int32_t bx = std::clamp(static_cast<std::int32_t>((p.x() - bucket_origin_.x()) / bucket_side_), 0,
                                       buckets_x_ - 1);
    const std::int32_t by = std::clamp(static_cast<std::int32_t>((p.y() - bucket_origin_.y()) / bucket_side_), 0,
                                       buckets_y_ - 1);
    std::int32_t best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    const std::int32_t max_ring = 4;
    for (std::int32_t ring = 0; ring <= max_ring; ++ring) {
        // Every node in a farther ring is at least (ring - 1) buckets away.
        if (best >= 0 && best_dist <= (ring - 1) * bucket_side_) break;
        for (std::int32_t dy = -ring; dy <= ring; ++dy) {
            for (std::int32_t dx = -ring; dx <= ring; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                const std::int32_t cx = bx + dx;
                const std::int32_t cy = by + dy;
                if (cx < 0 || cy < 0 || cx >= buckets_x_ || cy >= buckets_y_) continue;
                const std::size_t b =
                    static_cast<std::size_t>(cy) * static_cast<std::size_t>(buckets_x_) + static_cast<std::size_t>(cx);
                for (std::size_t k = bucket_offset_[b]; k < bucket_offset_[b + 1]; ++k) {
                    const std::int32_t u = bucket_node_[k];
                    const double dist = (nodes_[static_cast<std::size_t>(u)].p - p).norm();
                    if (dist < best_dist || (dist == best_dist && u < best)) {
                        best = u;
                        best_dist = dist;
                    }
                }
            }
        }
    }
    return {best, best_dist};
}

std::int32_t MetricGraph::snap(const Vec2& p) const {
    if (!spec_.contains(p)) {
        std::ostringstream os;
        os << "(" << p.x() << ", " << p.y() << ") is not an interior point of " << spec_.kind_name();
        throw Error(ErrorCode::PointOutsideDomain, os.str());
    }
    const auto [id, dist] = nearest_node(p);
    if (id < 0 || dist > kSnapCells * static_cast<double>(nodes_[static_cast<std::size_t>(id)].spacing)) {
        std::ostringstream os;
        os << "no graph node within " << kSnapCells << " cells of (" << p.x() << ", " << p.y()
           << "); the point sits in the unresolved boundary sliver";
        throw Error(ErrorCode::PointOutsideDomain, os.str());
    }
    return id;
}

std::string MetricGraph::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-graph/1";
    j["domain"] = nlohmann::ordered_json::parse(spec_.to_json_text());
    j["params"] = {{"h_coarse", params_.h_coarse},
                   {"whitney_c", params_.whitney_c},
                   {"max_nodes", params_.max_nodes},
                   {"neighbor_stencil", stencil_name(params_.neighbor_stencil)},
                   {"max_depth", params_.max_depth}};
    auto nodes = nlohmann::ordered_json::array();
    for (const Node& nd : nodes_) {
        nodes.push_back({nd.p.x(), nd.p.y(), nd.delta});
    }
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
        for (std::size_t a = arc_offset_[u]; a < arc_offset_[u + 1]; ++a) {
            if (arc_to_[a] > static_cast<std::int32_t>(u)) {
                edges.push_back({u, arc_to_[a], arc_elen_[a], arc_qlen_[a]});
            }
        }
    }
    j["edges"] = std::move(edges);
    return j.dump(2);
}

}  // namespace qhgeo
