#pragma once

#include "qhgeo/domain.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qhgeo {

/// Neighbor pattern used when wiring lattice nodes. axis4 connects lattice
/// neighbors only, king8 adds diagonals, knight16 adds the (2,1) moves for
/// convergence studies.
enum class Stencil { axis4, king8, knight16 };

const char* stencil_name(Stencil s);
Stencil stencil_from_name(const std::string& name);

struct GridParams {
    double h_coarse = 0.05;     // base cell side before refinement
    double whitney_c = 0.5;     // cell side cap as a fraction of local boundary gap
    std::int64_t max_nodes = 4000000;
    Stencil neighbor_stencil = Stencil::king8;
    int max_depth = 7;          // dyadic refinement levels below h_coarse
};

/// Boundary-adapted grid graph. Cells of the dyadic tree are kept while their
/// side stays within whitney_c times the cell's boundary-gap lower bound, so
/// every retained corner is strictly interior with gap >= side / whitney_c.
/// Immutable after construction; all queries are safe to run concurrently.
class MetricGraph {
public:
    struct Node {
        Vec2 p;
        double delta;    // Euclidean gap to the domain boundary
        float spacing;   // largest incident cell side
    };

    const DomainSpec& domain() const { return spec_; }
    const GridParams& params() const { return params_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return arc_to_.size() / 2; }
    const Node& node(std::size_t i) const { return nodes_[i]; }

    // Directed arc storage (each undirected edge appears in both directions).
    std::size_t arc_begin(std::size_t u) const { return arc_offset_[u]; }
    std::size_t arc_end(std::size_t u) const { return arc_offset_[u + 1]; }
    std::size_t arc_count() const { return arc_to_.size(); }
    std::int32_t arc_to(std::size_t a) const { return arc_to_[a]; }
    double arc_euclid_len(std::size_t a) const { return arc_elen_[a]; }
    double arc_qh_len(std::size_t a) const { return arc_qlen_[a]; }
    const double* arc_euclid_data() const { return arc_elen_.data(); }
    const double* arc_qh_data() const { return arc_qlen_.data(); }

    /// Nearest node id and its Euclidean distance to p.
    std::pair<std::int32_t, double> nearest_node(const Vec2& p) const;

    /// Nearest node within 1.5 local cell sides of an interior point.
    /// Throws point-outside-domain when p is exterior or no node is that close.
    std::int32_t snap(const Vec2& p) const;

    /// Versioned JSON dump (schema "qhgeo-graph/1") with nodes, gaps, edges.
    std::string to_json_text() const;

private:
    friend MetricGraph build_graph(const DomainSpec& spec, const GridParams& params);

    MetricGraph(DomainSpec spec, GridParams params) : spec_(std::move(spec)), params_(params) {}

    DomainSpec spec_;
    GridParams params_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> arc_offset_;
    std::vector<std::int32_t> arc_to_;
    std::vector<double> arc_elen_;
    std::vector<double> arc_qlen_;

    // Uniform bucket grid over the bounding box for nearest-node queries.
    Vec2 bucket_origin_;
    double bucket_side_ = 1.0;
    std::int32_t buckets_x_ = 0;
    std::int32_t buckets_y_ = 0;
    std::vector<std::size_t> bucket_offset_;
    std::vector<std::int32_t> bucket_node_;
};

/// Deterministic boundary-adapted discretization of the domain.
/// Errors: node-budget-exceeded when refinement would pass max_nodes;
/// disconnected-graph when retained nodes do not form a single component.
MetricGraph build_graph(const DomainSpec& spec, const GridParams& params);

/// build_graph with h_coarse divided by factor (> 1), same other params.
MetricGraph refine(const MetricGraph& graph, double factor);

}  // namespace qhgeo
