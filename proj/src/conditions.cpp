#include "qhgeo/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <locale>
#include <random>
#include <sstream>

#include "qhgeo/errors.hpp"

namespace qhgeo {

namespace {

// Polyline lengths of every prefix, prefix[i] = length of path[0..i].
std::vector<double> prefix_lengths(const std::vector<Vec2>& pts) {
    std::vector<double> pre(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        pre[i] = pre[i - 1] + (pts[i] - pts[i - 1]).norm();
    return pre;
}

// diam[i] = max pairwise chord of pts[0..i] (forward) or pts[i..n-1]
// (backward). Incremental: each new point is checked against all previous,
// quadratic in the path length but exact.
std::vector<double> prefix_diameters(const std::vector<Vec2>& pts, bool backward) {
    const std::size_t n = pts.size();
    std::vector<double> diam(n, 0.0);
    if (backward) {
        for (std::size_t i = n - 1; i-- > 0;) {
            double d = diam[i + 1];
            for (std::size_t j = i + 1; j < n; ++j)
                d = std::max(d, (pts[j] - pts[i]).norm());
            diam[i] = d;
        }
    } else {
        for (std::size_t i = 1; i < n; ++i) {
            double d = diam[i - 1];
            for (std::size_t j = 0; j < i; ++j)
                d = std::max(d, (pts[i] - pts[j]).norm());
            diam[i] = d;
        }
    }
    return diam;
}

}  // namespace

const char* cigar_variant_name(CigarVariant v) {
    return v == CigarVariant::length ? "length" : "diameter";
}

CigarReport cigar_coefficient(const PathRecord& path, CigarVariant variant) {
    const std::size_t n = path.points.size();
    if (n == 0) throw Error(ErrorCode::EmptyPath, "cigar coefficient of an empty path");
    CigarReport report;
    report.variant = variant;
    if (n == 1) return report;

    std::vector<double> left, right;
    if (variant == CigarVariant::length) {
        left = prefix_lengths(path.points);
        right.resize(n);
        const double total = left[n - 1];
        for (std::size_t i = 0; i < n; ++i) right[i] = total - left[i];
    } else {
        left = prefix_diameters(path.points, false);
        right = prefix_diameters(path.points, true);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double side = std::min(left[i], right[i]);
        if (side <= 0.0) continue;  // endpoints contribute nothing
        const double c = side / path.deltas[i];
        if (c > report.coefficient) {
            report.coefficient = c;
            report.witness = i;
        }
    }
    return report;
}

double turning_coefficient(const PathRecord& path) {
    if (path.points.empty()) throw Error(ErrorCode::EmptyPath, "turning coefficient of an empty path");
    if (path.points.size() < 2 || !(path.euclid_chord > 0.0))
        throw Error(ErrorCode::DegeneratePair,
                    "turning coefficient needs distinct endpoints");
    return path.inner_len / path.euclid_chord;
}

const char* uniformity_mode_name(UniformityMode m) {
    switch (m) {
        case UniformityMode::john: return "john";
        case UniformityMode::uniform: return "uniform";
        case UniformityMode::inner_uniform: return "inner-uniform";
    }
    return "uniform";
}

UniformityMode uniformity_mode_from_name(const std::string& name) {
    if (name == "john") return UniformityMode::john;
    if (name == "uniform") return UniformityMode::uniform;
    if (name == "inner-uniform" || name == "inner_uniform") return UniformityMode::inner_uniform;
    throw Error(ErrorCode::MalformedSpec, "unknown uniformity mode '" + name + "'");
}

std::vector<std::pair<Vec2, Vec2>> sample_pairs(const MetricGraph& graph,
                                                int count,
                                                std::uint64_t seed) {
    if (count < 1) throw Error(ErrorCode::TooFewPairs, "need at least one pair");
    const auto [lo, hi] = graph.domain().bounding_box();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.x(), hi.x());
    std::uniform_real_distribution<double> uy(lo.y(), hi.y());

    // Rejection sampling; a point counts once it lies inside and within
    // snapping range of a node, so every returned pair is usable downstream.
    long attempts = 0;
    const long attempt_cap = 20000L * count + 100000L;
    auto draw = [&]() -> Vec2 {
        for (;;) {
            if (++attempts > attempt_cap)
                throw Error(ErrorCode::PreconditionViolation,
                            "pair sampling failed to hit the domain; grid too sparse");
            const Vec2 p(ux(rng), uy(rng));
            if (!graph.domain().contains(p)) continue;
            const auto [id, dist] = graph.nearest_node(p);
            if (id < 0) continue;
            if (dist <= 1.5 * static_cast<double>(graph.node(id).spacing)) return p;
        }
    };

    std::vector<std::pair<Vec2, Vec2>> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const Vec2 a = draw();
        const Vec2 b = draw();
        pairs.emplace_back(a, b);
    }
    return pairs;
}

UniformityEstimate estimate_uniformity(const MetricGraph& graph,
                                       UniformityMode mode,
                                       const std::vector<std::pair<Vec2, Vec2>>& pairs) {
    if (pairs.empty()) throw Error(ErrorCode::TooFewPairs, "need at least one pair");
    UniformityEstimate est;
    est.mode = mode;

    const Metric qh = Metric::quasihyperbolic();
    const Metric inner = Metric::inner();

    for (const auto& [x, y] : pairs) {
        const std::int32_t ux = graph.snap(x);
        const std::int32_t uy = graph.snap(y);
        if (ux == uy) continue;
        const double chord = (graph.node(ux).p - graph.node(uy).p).norm();
        const double cells = 2.0 * std::max(static_cast<double>(graph.node(ux).spacing),
                                            static_cast<double>(graph.node(uy).spacing));
        if (chord < cells) continue;  // too close to say anything at this resolution

        const PathRecord rec = geodesic(graph, x, y, qh);
        PairSample s;
        s.x = x;
        s.y = y;
        s.cigar = cigar_coefficient(rec, CigarVariant::length).coefficient;
        switch (mode) {
            case UniformityMode::john:
                s.turning = 0.0;
                s.M = s.cigar;
                break;
            case UniformityMode::uniform:
                s.turning = rec.inner_len / rec.euclid_chord;
                s.M = std::max(s.cigar, s.turning);
                break;
            case UniformityMode::inner_uniform: {
                const double sigma = node_distance(graph, inner, ux, uy);
                s.turning = rec.inner_len / sigma;
                s.M = std::max(s.cigar, s.turning);
                break;
            }
        }
        est.pair_count += 1;
        if (s.M > est.M_hat || est.pair_count == 1) {
            est.M_hat = std::max(est.M_hat, s.M);
            est.worst_x = x;
            est.worst_y = y;
        }
        est.samples.push_back(s);
    }
    return est;
}

UniformityEstimate estimate_uniformity(const MetricGraph& graph,
                                       UniformityMode mode,
                                       int pairs,
                                       std::uint64_t seed) {
    return estimate_uniformity(graph, mode, sample_pairs(graph, pairs, seed));
}

std::string uniformity_csv(const std::string& domain_id,
                           const UniformityEstimate& estimate) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "domain,mode,xa,ya,xb,yb,cigar,turning,M\n";
    for (const PairSample& s : estimate.samples) {
        out << domain_id << ',' << uniformity_mode_name(estimate.mode) << ','
            << s.x.x() << ',' << s.x.y() << ','
            << s.y.x() << ',' << s.y.y() << ','
            << s.cigar << ',' << s.turning << ',' << s.M << '\n';
    }
    return out.str();
}

}  // namespace qhgeo
