#include "qhgeo/gromov.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <locale>
#include <queue>
#include <random>
#include <sstream>
#include <utility>

#include "qhgeo/errors.hpp"

namespace qhgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node pools keep the estimator affordable: all-pairs distances are cached
// for a small seeded subset and quadruples are drawn from it. The pool never
// depends on the quadruple count, so a longer run extends a shorter one.
constexpr std::size_t kPoolCap = 64;

// Dyadic approach depth used where the caller does not choose one.
constexpr int kDefaultApproachDepth = 6;

std::vector<std::int32_t> sample_pool(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::int32_t> pool;
    if (n <= kPoolCap) {
        pool.resize(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<std::int32_t>(i);
        return pool;
    }
    std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(n) - 1);
    while (pool.size() < kPoolCap) {
        const std::int32_t id = pick(rng);
        if (std::find(pool.begin(), pool.end(), id) == pool.end()) pool.push_back(id);
    }
    return pool;
}

// Max residual min{(x|z)_p, (z|y)_p} - (x|y)_p over quadruples drawn from
// pool slots; slot_dist gives the metric between pool slots.
template <typename SlotDist>
DeltaEstimate residual_scan(const std::vector<std::int32_t>& pool, SlotDist&& slot_dist,
                            long quadruples, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    DeltaEstimate est;
    est.quadruple_count = quadruples;
    double best = -kInf;
    for (long q = 0; q < quadruples; ++q) {
        const std::size_t sx = pick(rng), sy = pick(rng), sz = pick(rng), sp = pick(rng);
        const double dxp = slot_dist(sx, sp), dyp = slot_dist(sy, sp), dzp = slot_dist(sz, sp);
        const double xz = 0.5 * (dxp + dzp - slot_dist(sx, sz));
        const double zy = 0.5 * (dzp + dyp - slot_dist(sz, sy));
        const double xy = 0.5 * (dxp + dyp - slot_dist(sx, sy));
        const double residual = std::min(xz, zy) - xy;
        if (residual > best) {
            best = residual;
            est.worst_quadruple = {pool[sx], pool[sy], pool[sz], pool[sp]};
        }
    }
    est.delta_hat = std::max(0.0, best);
    return est;
}

// Deepest interior node reachable from a boundary anchor by stepping inward
// along a candidate normal at dyadic fractions of the domain thickness.
std::int32_t anchor_proxy(const MetricGraph& g, const Vec2& anchor, int depth) {
    const DomainSpec& dom = g.domain();
    if (dom.boundary_set_distance(anchor) > 1e-9)
        throw Error(ErrorCode::AnchorApproachFailure, "anchor is not on the boundary set");
    const auto [lo, hi] = dom.bounding_box();
    const double reach = 0.25 * std::min(hi.x() - lo.x(), hi.y() - lo.y());
    const std::vector<Vec2> normals = dom.inward_normals(anchor);
    for (int d = depth; d >= 1; --d) {
        const double off = reach * std::ldexp(1.0, -d);
        for (const Vec2& n : normals) {
            const Vec2 p = anchor + off * n;
            if (!dom.contains(p)) continue;
            const auto [id, dist] = g.nearest_node(p);
            if (id >= 0 && dist <= 1.5 * static_cast<double>(g.node(id).spacing)) return id;
        }
    }
    throw Error(ErrorCode::AnchorApproachFailure, "no interior proxy node near anchor");
}

// Min quasihyperbolic distance to a set of source nodes, one sweep.
std::vector<double> multi_source_qh(const MetricGraph& g, const std::vector<std::int32_t>& sources) {
    const std::size_t n = static_cast<std::size_t>(g.node_count());
    const double* w = g.arc_qh_data();
    std::vector<double> dist(n, kInf);
    using Item = std::pair<double, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (const std::int32_t s : sources) {
        dist[static_cast<std::size_t>(s)] = 0.0;
        heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d != dist[static_cast<std::size_t>(u)]) continue;
        const std::size_t uu = static_cast<std::size_t>(u);
        for (std::size_t a = g.arc_begin(uu); a < g.arc_end(uu); ++a) {
            const std::int32_t v = g.arc_to(a);
            const double nd = d + w[a];
            if (nd < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

}  // namespace

BasePoint choose_base_point(const MetricGraph& graph) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw Error(ErrorCode::PreconditionViolation, "empty graph has no base point");
    BasePoint base;
    base.w0 = 0;
    base.delta_sigma = graph.node(0).delta;
    for (std::size_t i = 1; i < n; ++i) {
        if (graph.node(i).delta > base.delta_sigma) {
            base.delta_sigma = graph.node(i).delta;
            base.w0 = static_cast<std::int32_t>(i);
        }
    }
    return base;
}

double gromov_product(const MetricGraph& graph, const Vec2& p, const Vec2& x, const Vec2& y) {
    const std::int32_t sp = graph.snap(p);
    const std::int32_t sx = graph.snap(x);
    const std::int32_t sy = graph.snap(y);
    const Metric qh = Metric::quasihyperbolic();
    const double dxp = node_distance(graph, qh, sx, sp);
    const double dyp = node_distance(graph, qh, sy, sp);
    const double dxy = node_distance(graph, qh, sx, sy);
    return 0.5 * (dxp + dyp - dxy);
}

double gromov_product(const Eigen::MatrixXd& dist, int p, int x, int y) {
    if (dist.rows() != dist.cols())
        throw Error(ErrorCode::InputConstraintViolation, "distance matrix must be square");
    const auto n = dist.rows();
    for (const int i : {p, x, y})
        if (i < 0 || i >= n)
            throw Error(ErrorCode::PreconditionViolation, "matrix index out of range");
    return 0.5 * (dist(x, p) + dist(y, p) - dist(x, y));
}

DeltaEstimate estimate_delta(const MetricGraph& graph, long quadruples, std::uint64_t seed) {
    if (quadruples < 1) throw Error(ErrorCode::PreconditionViolation, "need at least one quadruple");
    if (graph.node_count() == 0)
        throw Error(ErrorCode::PreconditionViolation, "empty graph");

    std::mt19937_64 rng(seed);
    const std::vector<std::int32_t> pool = sample_pool(graph.node_count(), rng);

    const Metric qh = Metric::quasihyperbolic();
    std::vector<std::vector<double>> table(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) table[i] = distance_table(graph, qh, pool[i]);

    auto slot_dist = [&](std::size_t a, std::size_t b) {
        const double d = table[a][static_cast<std::size_t>(pool[b])];
        if (!(d < kInf))
            throw Error(ErrorCode::UnreachableNode, "pool nodes are not all connected");
        return d;
    };
    return residual_scan(pool, slot_dist, quadruples, rng);
}

DeltaEstimate estimate_delta(const Eigen::MatrixXd& dist, long quadruples, std::uint64_t seed) {
    if (dist.rows() != dist.cols())
        throw Error(ErrorCode::InputConstraintViolation, "distance matrix must be square");
    if (dist.rows() < 1)
        throw Error(ErrorCode::InputConstraintViolation, "distance matrix is empty");
    if (quadruples < 1) throw Error(ErrorCode::PreconditionViolation, "need at least one quadruple");

    std::mt19937_64 rng(seed);
    const std::vector<std::int32_t> pool = sample_pool(static_cast<std::size_t>(dist.rows()), rng);
    auto slot_dist = [&](std::size_t a, std::size_t b) { return dist(pool[a], pool[b]); };
    return residual_scan(pool, slot_dist, quadruples, rng);
}

VisualTable visual_table(const MetricGraph& graph, const BasePoint& base, double tau,
                         const std::vector<Vec2>& anchors, int approach_depth) {
    if (!(tau > 0.0))
        throw Error(ErrorCode::InputConstraintViolation, "tau must be positive");
    if (approach_depth < 1)
        throw Error(ErrorCode::InputConstraintViolation, "approach depth must be >= 1");
    if (anchors.empty()) throw Error(ErrorCode::TooFewPoints, "no boundary anchors given");

    VisualTable vt;
    vt.tau = tau;
    vt.anchors = anchors;
    const auto n = static_cast<Eigen::Index>(anchors.size());
    vt.proxy_nodes.reserve(anchors.size());
    for (const Vec2& xi : anchors) vt.proxy_nodes.push_back(anchor_proxy(graph, xi, approach_depth));

    const Metric qh = Metric::quasihyperbolic();
    const std::vector<double> from_base = distance_table(graph, qh, base.w0);
    auto base_dist = [&](std::size_t i) {
        const double d = from_base[static_cast<std::size_t>(vt.proxy_nodes[i])];
        if (!(d < kInf)) throw Error(ErrorCode::UnreachableNode, "anchor proxy unreachable");
        return d;
    };

    vt.products.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vt.products(i, i) = base_dist(static_cast<std::size_t>(i));
        if (i + 1 == n) break;
        const std::vector<double> from_i =
            distance_table(graph, qh, vt.proxy_nodes[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dij = from_i[static_cast<std::size_t>(vt.proxy_nodes[static_cast<std::size_t>(j)])];
            const double prod =
                0.5 * (base_dist(static_cast<std::size_t>(i)) + base_dist(static_cast<std::size_t>(j)) - dij);
            vt.products(i, j) = prod;
            vt.products(j, i) = prod;
        }
    }
    vt.rho.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) vt.rho(i, j) = std::exp(-tau * vt.products(i, j));
    return vt;
}

std::string VisualTable::to_csv() const {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "tau," << tau << '\n';
    out << "anchors";
    for (const Vec2& a : anchors) out << ',' << a.x() << ',' << a.y();
    out << '\n';
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (j) out << ',';
            out << rho(i, j);
        }
        out << '\n';
    }
    return out.str();
}

double starlikeness_probe(const MetricGraph& graph, const BasePoint& base,
                          const std::vector<Vec2>& anchors, int samples, std::uint64_t seed) {
    if (anchors.empty()) throw Error(ErrorCode::TooFewPoints, "no boundary anchors given");
    if (samples < 1)
        throw Error(ErrorCode::InputConstraintViolation, "need at least one sample");

    const Metric qh = Metric::quasihyperbolic();
    const Vec2 w0p = graph.node(base.w0).p;
    std::vector<double> to_nearest_ray(static_cast<std::size_t>(graph.node_count()), kInf);
    for (const Vec2& xi : anchors) {
        const std::int32_t proxy = anchor_proxy(graph, xi, kDefaultApproachDepth);
        const PathRecord ray = geodesic(graph, w0p, graph.node(proxy).p, qh);
        const std::vector<double> d = multi_source_qh(graph, ray.nodes);
        for (std::size_t i = 0; i < to_nearest_ray.size(); ++i)
            to_nearest_ray[i] = std::min(to_nearest_ray[i], d[i]);
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int32_t> pick(
        0, static_cast<std::int32_t>(graph.node_count()) - 1);
    double k_hat = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double d = to_nearest_ray[static_cast<std::size_t>(pick(rng))];
        if (!(d < kInf)) throw Error(ErrorCode::UnreachableNode, "sampled node sees no ray");
        k_hat = std::max(k_hat, d);
    }
    return k_hat;
}

std::string DeltaEstimate::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-delta/1";
    j["delta_hat"] = delta_hat;
    j["quadruple_count"] = quadruple_count;
    j["worst_quadruple"] = worst_quadruple;
    return j.dump(2);
}

}  // namespace qhgeo
