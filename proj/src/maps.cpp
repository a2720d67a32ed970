#include "qhgeo/maps.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "qhgeo/errors.hpp"
#include "qhgeo/metrics.hpp"

namespace qhgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Envelope domain: source ratios outside [kTMin, kTMax] are not binnable.
constexpr double kTMin = 1e-3;
constexpr double kTMax = 1e3;

// Dyadic approach depth for boundary proxies used by the verdicts.
constexpr int kProxyDepth = 6;

std::vector<std::int32_t> snap_all(const MetricGraph& g,
                                   const std::vector<std::pair<Vec2, Vec2>>& pairs, bool first) {
    std::vector<std::int32_t> ids;
    ids.reserve(pairs.size());
    for (const auto& pr : pairs) ids.push_back(g.snap(first ? pr.first : pr.second));
    return ids;
}

Eigen::MatrixXd pairwise_node_distances(const MetricGraph& g, const Metric& metric,
                                        const std::vector<std::int32_t>& ids) {
    const auto n = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        if (i + 1 == n) break;
        const std::vector<double> table = distance_table(g, metric, ids[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = table[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])];
            if (!(v < kInf))
                throw Error(ErrorCode::UnreachableNode, "sampled nodes are not all connected");
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

// Typical single-edge quasihyperbolic cost. The median, not the max: cells
// capped by max_depth give a few arbitrarily heavy boundary edges.
double median_arc_qh(const MetricGraph& g) {
    std::vector<double> w(g.arc_qh_data(), g.arc_qh_data() + g.arc_count());
    if (w.empty()) return 0.0;
    const auto mid = w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2);
    std::nth_element(w.begin(), mid, w.end());
    return *mid;
}

// Nearest-node proxy for a boundary point; boundary-adapted cells guarantee
// one within a few nearby buckets.
std::int32_t boundary_proxy(const MetricGraph& g, const Vec2& b) {
    const auto [id, dist] = g.nearest_node(b);
    if (id < 0) throw Error(ErrorCode::AnchorApproachFailure, "no node near boundary point");
    (void)dist;
    return id;
}

// Builds a record over an explicit node walk; consecutive nodes must be
// graph-adjacent. Matches the geodesic assembly arithmetic exactly.
PathRecord assemble_record(const MetricGraph& g, const std::vector<std::int32_t>& nodes) {
    PathRecord rec;
    rec.metric = Metric::Kind::quasihyperbolic;
    rec.nodes = nodes;
    rec.points.reserve(nodes.size());
    rec.deltas.reserve(nodes.size());
    for (const std::int32_t id : nodes) {
        rec.points.push_back(g.node(static_cast<std::size_t>(id)).p);
        rec.deltas.push_back(g.node(static_cast<std::size_t>(id)).delta);
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const std::size_t u = static_cast<std::size_t>(nodes[i - 1]);
        bool found = false;
        for (std::size_t a = g.arc_begin(u); a < g.arc_end(u); ++a) {
            if (g.arc_to(a) == nodes[i]) {
                rec.inner_len += g.arc_euclid_len(a);
                rec.qh_len += g.arc_qh_len(a);
                found = true;
                break;
            }
        }
        if (!found)
            throw Error(ErrorCode::PreconditionViolation, "walk steps over a missing edge");
    }
    if (!rec.points.empty()) rec.euclid_chord = (rec.points.back() - rec.points.front()).norm();
    return rec;
}

bool arcs_adjacent(const MetricGraph& g, std::int32_t u, std::int32_t v) {
    for (std::size_t a = g.arc_begin(static_cast<std::size_t>(u));
         a < g.arc_end(static_cast<std::size_t>(u)); ++a)
        if (g.arc_to(a) == v) return true;
    return false;
}

VerdictOutcome combine(const std::vector<PropertyCheck>& checks) {
    bool all_pass = true;
    for (const PropertyCheck& c : checks) {
        if (std::isnan(c.measured)) return VerdictOutcome::inconclusive;
        all_pass = all_pass && c.pass;
    }
    return all_pass ? VerdictOutcome::pass : VerdictOutcome::fail;
}

}  // namespace

void SampledMap::validate(const DomainSpec& src, const DomainSpec& dst) const {
    for (const auto& [x, y] : interior_pairs) {
        if (!src.contains(x))
            throw Error(ErrorCode::PointOutsideDomain, "interior source sample not in the domain");
        if (!dst.contains(y))
            throw Error(ErrorCode::PointOutsideDomain, "interior image sample not in the domain");
    }
    for (const auto& [x, y] : boundary_pairs) {
        if (src.boundary_set_distance(x) > 1e-9)
            throw Error(ErrorCode::InputConstraintViolation, "boundary source sample off the boundary");
        if (dst.boundary_set_distance(y) > 1e-9)
            throw Error(ErrorCode::InputConstraintViolation, "boundary image sample off the boundary");
    }
    std::vector<Vec2> sources;
    sources.reserve(interior_pairs.size() + boundary_pairs.size());
    for (const auto& pr : interior_pairs) sources.push_back(pr.first);
    for (const auto& pr : boundary_pairs) sources.push_back(pr.first);
    std::sort(sources.begin(), sources.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    for (std::size_t i = 1; i < sources.size(); ++i)
        if (sources[i] == sources[i - 1])
            throw Error(ErrorCode::InputConstraintViolation, "duplicated source sample point");
}

SampledMap SampledMap::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedSpec, std::string("map json: ") + e.what());
    }
    auto read_pairs = [&](const char* key) {
        std::vector<std::pair<Vec2, Vec2>> out;
        if (!j.contains(key)) return out;
        for (const auto& item : j.at(key)) {
            if (!item.is_array() || item.size() != 2 || item[0].size() != 2 || item[1].size() != 2)
                throw Error(ErrorCode::MalformedSpec,
                            std::string(key) + " entries must be [[x,y],[x,y]]");
            out.emplace_back(Vec2(item[0][0].get<double>(), item[0][1].get<double>()),
                             Vec2(item[1][0].get<double>(), item[1][1].get<double>()));
        }
        return out;
    };
    SampledMap m;
    m.interior_pairs = read_pairs("interior_pairs");
    m.boundary_pairs = read_pairs("boundary_pairs");
    m.label = j.value("label", std::string());
    return m;
}

std::string SampledMap::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-map/1";
    j["label"] = label;
    auto dump_pairs = [](const std::vector<std::pair<Vec2, Vec2>>& pairs) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [a, b] : pairs)
            arr.push_back({{a.x(), a.y()}, {b.x(), b.y()}});
        return arr;
    };
    j["interior_pairs"] = dump_pairs(interior_pairs);
    j["boundary_pairs"] = dump_pairs(boundary_pairs);
    return j.dump(2);
}

double quasihyperbolicity_coefficient(const MetricGraph& graph_src, const MetricGraph& graph_dst,
                                      const SampledMap& m) {
    if (m.interior_pairs.size() < 2)
        throw Error(ErrorCode::TooFewPairs, "need at least two interior samples");
    m.validate(graph_src.domain(), graph_dst.domain());

    const std::vector<std::int32_t> src_ids = snap_all(graph_src, m.interior_pairs, true);
    const std::vector<std::int32_t> dst_ids = snap_all(graph_dst, m.interior_pairs, false);
    const Metric qh = Metric::quasihyperbolic();
    const Eigen::MatrixXd dS = pairwise_node_distances(graph_src, qh, src_ids);
    const Eigen::MatrixXd dD = pairwise_node_distances(graph_dst, qh, dst_ids);

    // Ratios on distances below a few cell crossings say more about the grid
    // than about the map; drop them.
    const double floor_src = 3.0 * median_arc_qh(graph_src);
    const double floor_dst = 3.0 * median_arc_qh(graph_dst);

    double L = 1.0;
    long used = 0;
    const auto n = dS.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double k = dS(i, j);
            const double kp = dD(i, j);
            if (k < floor_src) continue;
            if (kp < floor_dst) {
                // an unresolved image pair is skipped, a collapsed one is not
                const std::size_t ui = static_cast<std::size_t>(dst_ids[static_cast<std::size_t>(i)]);
                const std::size_t uj = static_cast<std::size_t>(dst_ids[static_cast<std::size_t>(j)]);
                const double img_chord = (graph_dst.node(ui).p - graph_dst.node(uj).p).norm();
                const double cells = 2.0 * std::max(static_cast<double>(graph_dst.node(ui).spacing),
                                                    static_cast<double>(graph_dst.node(uj).spacing));
                if (img_chord < cells) continue;
            }
            ++used;
            L = std::max(L, kp > 0.0 ? std::max(kp / k, k / kp) : kInf);
        }
    if (used == 0)
        throw Error(ErrorCode::TooFewPairs, "all sampled pairs sit under the resolution floor");
    return L;
}

std::pair<double, double> rough_qi_parameters(const Eigen::MatrixXd& dist_src,
                                              const Eigen::MatrixXd& dist_dst) {
    if (dist_src.rows() != dist_src.cols() || dist_dst.rows() != dist_dst.cols())
        throw Error(ErrorCode::InputConstraintViolation, "distance tables must be square");
    if (dist_src.rows() != dist_dst.rows())
        throw Error(ErrorCode::InputConstraintViolation, "tables must share one index set");
    if (dist_src.rows() < 2) throw Error(ErrorCode::TooFewPairs, "need at least two indices");

    // Two-sided affine envelope K(L) = max |d' - L d| over a multiplicative
    // grid of slopes. It dominates the rough sandwich in both directions
    // (L >= 1 gives Ld - K >= d/L - K) and, unlike a one-sided fit, is not
    // minimized by inflating L.
    const auto n = dist_src.rows();
    double best_L = 1.0, best_K = kInf;
    for (double L = 1.0; L <= 10.0 * 1.005; L *= 1.01) {
        double K = 0.0;
        for (Eigen::Index i = 0; i < n && K < best_K; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
                K = std::max(K, std::abs(dist_dst(i, j) - L * dist_src(i, j)));
        if (K < best_K) {
            best_K = K;
            best_L = L;
        }
    }
    return {best_L, best_K};
}

double QsEnvelope::eta_hat_at(double t) const {
    double running = 0.0;
    for (const QsBin& b : bins) {
        if (b.count > 0) running = std::max(running, b.max_ratio);
        if (t < b.t_high) break;
    }
    return running;
}

QsEnvelope qs_envelope(const Eigen::MatrixXd& dist_src, const Eigen::MatrixXd& dist_dst,
                       int triples, std::uint64_t seed, int bins) {
    if (dist_src.rows() != dist_src.cols() || dist_dst.rows() != dist_dst.cols() ||
        dist_src.rows() != dist_dst.rows())
        throw Error(ErrorCode::InputConstraintViolation, "tables must be square and matched");
    if (dist_src.rows() < 3) throw Error(ErrorCode::TooFewPoints, "need at least three points");
    if (triples < 1) throw Error(ErrorCode::PreconditionViolation, "need at least one triple");
    if (bins < 1) throw Error(ErrorCode::PreconditionViolation, "need at least one bin");

    QsEnvelope env;
    env.bins.resize(static_cast<std::size_t>(bins));
    const double log_lo = std::log(kTMin);
    const double log_hi = std::log(kTMax);
    const double width = (log_hi - log_lo) / bins;
    for (int b = 0; b < bins; ++b) {
        env.bins[static_cast<std::size_t>(b)].t_low = std::exp(log_lo + b * width);
        env.bins[static_cast<std::size_t>(b)].t_high = std::exp(log_lo + (b + 1) * width);
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, dist_src.rows() - 1);
    for (int s = 0; s < triples; ++s) {
        const Eigen::Index a = pick(rng), x = pick(rng), b = pick(rng);
        // Index-distinct triples only: a metametric table can carry a
        // positive diagonal, which would fake a collapsed pair otherwise.
        if (a == x || x == b || a == b) continue;
        const double den = dist_src(x, b);
        if (!(den > 0.0)) continue;  // degenerate triple
        const double t = dist_src(a, x) / den;
        if (t < kTMin || t >= kTMax) continue;
        const double den_dst = dist_dst(x, b);
        const double tp = den_dst > 0.0 ? dist_dst(a, x) / den_dst : kInf;

        const int idx = std::min(bins - 1, static_cast<int>((std::log(t) - log_lo) / width));
        QsBin& bin = env.bins[static_cast<std::size_t>(idx)];
        bin.max_ratio = std::max(bin.max_ratio, tp);
        bin.count += 1;
        env.triple_count += 1;
    }
    return env;
}

PullbackCigarSummary pullback_geodesic_cigar(const MetricGraph& graph_src,
                                             const MetricGraph& graph_dst, const SampledMap& m,
                                             int pairs, std::uint64_t seed) {
    if (m.interior_pairs.empty())
        throw Error(ErrorCode::TooFewPairs, "map carries no interior samples");
    if (pairs < 1) throw Error(ErrorCode::TooFewPairs, "need at least one endpoint pair");
    m.validate(graph_src.domain(), graph_dst.domain());

    // Match tolerance: three times the widest nearest-neighbor gap among the
    // sampled images. A waypoint farther than that from every image is not
    // covered by the correspondence.
    const std::size_t n = m.interior_pairs.size();
    double cover = kInf;
    if (n > 1) {
        cover = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double nn = kInf;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    nn = std::min(nn, (m.interior_pairs[i].second - m.interior_pairs[j].second).norm());
            cover = std::max(cover, nn);
        }
    }
    const double tol = 3.0 * cover;

    auto pull_back = [&](const Vec2& y) -> Vec2 {
        std::size_t best = 0;
        double best_d = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (m.interior_pairs[i].second - y).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best_d > tol)
            throw Error(ErrorCode::UnmatchedWaypoint, "waypoint is not covered by the sampled map");
        return m.interior_pairs[best].first;
    };

    const Metric qh = Metric::quasihyperbolic();
    PullbackCigarSummary summary;
    summary.length.variant = CigarVariant::length;
    summary.diameter.variant = CigarVariant::diameter;

    const auto endpoint_pairs = sample_pairs(graph_dst, pairs, seed);
    for (const auto& [ya, yb] : endpoint_pairs) {
        const PathRecord down = geodesic(graph_dst, ya, yb, qh);

        // Pull each waypoint back and walk the source graph through them.
        std::vector<std::int32_t> walk;
        for (const Vec2& wp : down.points) {
            const std::int32_t u = graph_src.snap(pull_back(wp));
            if (!walk.empty() && walk.back() == u) continue;
            if (walk.empty() || arcs_adjacent(graph_src, walk.back(), u)) {
                walk.push_back(u);
                continue;
            }
            const PathRecord leg = geodesic(graph_src, graph_src.node(static_cast<std::size_t>(walk.back())).p,
                                            graph_src.node(static_cast<std::size_t>(u)).p, qh);
            walk.insert(walk.end(), leg.nodes.begin() + 1, leg.nodes.end());
        }
        const PathRecord pulled = assemble_record(graph_src, walk);

        const CigarReport len = cigar_coefficient(pulled, CigarVariant::length);
        const CigarReport dia = cigar_coefficient(pulled, CigarVariant::diameter);
        if (len.coefficient > summary.length.coefficient) summary.length = len;
        if (dia.coefficient > summary.diameter.coefficient) summary.diameter = dia;
        summary.pair_count += 1;
    }
    return summary;
}

PropertyVerdict property_b_verdict(const MetricGraph& graph_src, const MetricGraph& graph_dst,
                                   const SampledMap& m, const VerdictThresholds& thresholds) {
    m.validate(graph_src.domain(), graph_dst.domain());
    PropertyVerdict v;
    v.property = PropertyTag::B;

    {
        PropertyCheck c{"uniformity", false, kNaN, thresholds.max_uniformity};
        const UniformityEstimate est =
            estimate_uniformity(graph_dst, UniformityMode::uniform, thresholds.pairs, thresholds.seed);
        if (est.pair_count > 0) {
            c.measured = est.M_hat;
            c.pass = est.M_hat <= thresholds.max_uniformity;
        }
        v.checks.push_back(c);
    }
    {
        PropertyCheck c{"quasihyperbolicity", false, kNaN, thresholds.max_quasihyperbolicity};
        if (m.interior_pairs.size() >= 2) {
            c.measured = quasihyperbolicity_coefficient(graph_src, graph_dst, m);
            c.pass = c.measured <= thresholds.max_quasihyperbolicity;
        }
        v.checks.push_back(c);
    }
    {
        PropertyCheck c{"boundary-quasisymmetry", false, kNaN, thresholds.max_envelope};
        if (m.boundary_pairs.size() >= 3) {
            std::vector<std::int32_t> proxies;
            proxies.reserve(m.boundary_pairs.size());
            for (const auto& pr : m.boundary_pairs)
                proxies.push_back(boundary_proxy(graph_src, pr.first));
            const Eigen::MatrixXd src =
                pairwise_node_distances(graph_src, Metric::inner(), proxies);
            const auto nb = static_cast<Eigen::Index>(m.boundary_pairs.size());
            Eigen::MatrixXd dst(nb, nb);
            for (Eigen::Index i = 0; i < nb; ++i)
                for (Eigen::Index j = 0; j < nb; ++j)
                    dst(i, j) = (m.boundary_pairs[static_cast<std::size_t>(i)].second -
                                 m.boundary_pairs[static_cast<std::size_t>(j)].second)
                                    .norm();
            const QsEnvelope env =
                qs_envelope(src, dst, thresholds.triples, thresholds.seed, thresholds.bins);
            if (env.triple_count > 0) {
                double worst = 0.0;
                for (const QsBin& b : env.bins)
                    if (b.count > 0) worst = std::max(worst, b.max_ratio);
                c.measured = worst;
                c.pass = std::isfinite(worst) && worst <= thresholds.max_envelope;
            }
        }
        v.checks.push_back(c);
    }
    v.overall = combine(v.checks);
    return v;
}

PropertyVerdict property_a_verdict(const MetricGraph& graph, const BasePoint& base, double tau,
                                   const std::vector<Vec2>& anchors,
                                   const VerdictThresholds& thresholds) {
    if (anchors.size() < 4)
        throw Error(ErrorCode::TooFewPoints, "need at least four boundary anchors");
    PropertyVerdict v;
    v.property = PropertyTag::A;

    {
        PropertyCheck c{"hyperbolicity", false, kNaN, thresholds.max_delta};
        const DeltaEstimate est = estimate_delta(graph, thresholds.quadruples, thresholds.seed);
        c.measured = est.delta_hat;
        c.pass = est.delta_hat <= thresholds.max_delta;
        v.checks.push_back(c);
    }
    {
        PropertyCheck c{"visual-boundary-quasisymmetry", false, kNaN, thresholds.max_envelope};
        const VisualTable vt = visual_table(graph, base, tau, anchors, kProxyDepth);
        const Eigen::MatrixXd inner =
            pairwise_node_distances(graph, Metric::inner(), vt.proxy_nodes);
        const QsEnvelope env =
            qs_envelope(vt.rho, inner, thresholds.triples, thresholds.seed, thresholds.bins);
        if (env.triple_count > 0) {
            double worst = 0.0;
            for (const QsBin& b : env.bins)
                if (b.count > 0) worst = std::max(worst, b.max_ratio);
            c.measured = worst;
            c.pass = std::isfinite(worst) && worst <= thresholds.max_envelope;
        }
        v.checks.push_back(c);
    }
    v.overall = combine(v.checks);
    return v;
}

std::string PropertyVerdict::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-verdict/1";
    j["property"] = property == PropertyTag::A ? "A" : "B";
    switch (overall) {
        case VerdictOutcome::pass: j["overall"] = "pass"; break;
        case VerdictOutcome::fail: j["overall"] = "fail"; break;
        case VerdictOutcome::inconclusive: j["overall"] = "inconclusive"; break;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const PropertyCheck& c : checks) {
        nlohmann::ordered_json jc;
        jc["name"] = c.name;
        jc["pass"] = c.pass;
        if (std::isfinite(c.measured))
            jc["measured"] = c.measured;
        else
            jc["measured"] = nullptr;  // could not be evaluated at this resolution
        jc["threshold"] = c.threshold;
        arr.push_back(jc);
    }
    j["checks"] = arr;
    return j.dump(2);
}

}  // namespace qhgeo
