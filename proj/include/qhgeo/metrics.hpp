#pragma once

#include "qhgeo/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qhgeo {

/// Conformal deformation of the quasihyperbolic structure: path elements are
/// scaled by exp(-epsilon * distance-to-base), flattening the metric far from
/// the base point.
struct DeformSpec {
    std::int32_t base_point = -1;  // node id in the carrying graph
    double epsilon = 0.0;          // > 0
};

/// Selector for the path metric carried by queries and records.
class Metric {
public:
    enum class Kind { inner, quasihyperbolic, deformed };

    static Metric inner() { return Metric(Kind::inner, {}); }
    static Metric quasihyperbolic() { return Metric(Kind::quasihyperbolic, {}); }
    static Metric deformed(DeformSpec spec) { return Metric(Kind::deformed, spec); }

    Kind kind() const { return kind_; }
    const DeformSpec& deform() const { return deform_; }
    const char* name() const;

private:
    Metric(Kind kind, DeformSpec deform) : kind_(kind), deform_(deform) {}

    Kind kind_;
    DeformSpec deform_;
};

/// One shortest path on the graph together with the side data every length
/// comparison needs. inner_len >= euclid_chord always.
struct PathRecord {
    Metric::Kind metric = Metric::Kind::inner;
    DeformSpec deform;                 // engaged when metric == deformed
    std::vector<std::int32_t> nodes;   // consecutive entries are graph-adjacent
    std::vector<Vec2> points;
    std::vector<double> deltas;
    double euclid_chord = 0.0;         // straight-line endpoint distance
    double inner_len = 0.0;            // sum of Euclidean edge lengths
    double qh_len = 0.0;               // sum of quasihyperbolic edge lengths

    std::string to_json_text() const;
};

/// Length of the shortest Euclidean-weighted path between the nodes x and y
/// snap to. The graph realization of the inner metric.
double inner_distance(const MetricGraph& graph, const Vec2& x, const Vec2& y);

/// Length of the shortest path weighted by edge length over boundary gap.
double quasihyperbolic_distance(const MetricGraph& graph, const Vec2& x, const Vec2& y);

/// Shortest path under quasihyperbolic weights damped by
/// exp(-epsilon * qh-distance to the base point), averaged per edge.
double deformed_distance(const MetricGraph& graph, const DeformSpec& spec, const Vec2& x,
                         const Vec2& y);

/// The arg-min path realizing the selected distance; among equal-length paths
/// the lexicographically smallest node-id sequence is returned.
PathRecord geodesic(const MetricGraph& graph, const Vec2& x, const Vec2& y, const Metric& metric);

/// Full single-source distance table from a node id (no snapping).
std::vector<double> distance_table(const MetricGraph& graph, const Metric& metric,
                                   std::int32_t source);

/// Graph distance between two node ids under the selected metric.
double node_distance(const MetricGraph& graph, const Metric& metric, std::int32_t u,
                     std::int32_t v);

}  // namespace qhgeo
