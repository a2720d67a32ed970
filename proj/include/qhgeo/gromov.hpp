#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qhgeo/grid.hpp"
#include "qhgeo/metrics.hpp"

namespace qhgeo {

// Distinguished interior observation point: the node deepest inside the
// domain. All products and visual quantities are taken from here.
struct BasePoint {
    std::int32_t w0 = 0;
    double delta_sigma = 0.0;  // its boundary clearance (inner and Euclidean agree)
};

struct DeltaEstimate {
    double delta_hat = 0.0;             // >= 0
    long quadruple_count = 0;
    std::array<std::int32_t, 4> worst_quadruple = {0, 0, 0, 0};  // (x, y, z, p)

    std::string to_json_text() const;
};

// Pairwise visual structure seen from the base point: products(i,j) is the
// Gromov product of boundary anchors i and j (via their deepest interior
// proxies), rho = exp(-tau * product).
struct VisualTable {
    double tau = 0.2;
    std::vector<Vec2> anchors;
    std::vector<std::int32_t> proxy_nodes;  // deepest snapped approach node per anchor
    Eigen::MatrixXd products;
    Eigen::MatrixXd rho;

    // Matrix CSV: a tau line, an anchor-coordinate line, then one row of rho
    // per anchor.
    std::string to_csv() const;
};

// Node maximizing boundary clearance; ties resolved to the smallest id.
BasePoint choose_base_point(const MetricGraph& graph);

// (x|y)_p = (k(x,p) + k(y,p) - k(x,y)) / 2 under the quasihyperbolic metric.
double gromov_product(const MetricGraph& graph, const Vec2& p, const Vec2& x, const Vec2& y);

// Same product over an explicit symmetric distance matrix, by row index.
double gromov_product(const Eigen::MatrixXd& dist, int p, int x, int y);

// Max hyperbolicity residual min{(x|z)_p, (z|y)_p} - (x|y)_p over seeded node
// quadruples, floored at 0. A sampled lower bound for the true delta.
DeltaEstimate estimate_delta(const MetricGraph& graph, long quadruples, std::uint64_t seed);

// Same residual scan over an explicit symmetric distance matrix. Decouples
// the estimator from any discretization.
DeltaEstimate estimate_delta(const Eigen::MatrixXd& dist, long quadruples, std::uint64_t seed);

// Builds anchor proxies by walking inward from each anchor along its inward
// normal at dyadic depths, then tabulates products and rho between anchors.
VisualTable visual_table(const MetricGraph& graph, const BasePoint& base, double tau,
                         const std::vector<Vec2>& anchors, int approach_depth);

// K_hat = max over sampled nodes of the quasihyperbolic distance to the
// nearest of the geodesic rays from the base point toward each anchor.
double starlikeness_probe(const MetricGraph& graph, const BasePoint& base,
                          const std::vector<Vec2>& anchors, int samples, std::uint64_t seed);

}  // namespace qhgeo
