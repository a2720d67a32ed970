#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qhgeo/grid.hpp"
#include "qhgeo/metrics.hpp"

namespace qhgeo {

// Carrot-style coefficient of a sampled path: the worst ratio between the
// smaller side of the path at an interior node and the clearance there.
enum class CigarVariant { length, diameter };

const char* cigar_variant_name(CigarVariant v);

struct CigarReport {
    double coefficient = 0.0;       // >= 0; 0 for single-node paths
    std::size_t witness = 0;        // path index attaining the maximum
    CigarVariant variant = CigarVariant::length;
};

// Length variant: side size = polyline length of the subpath.
// Diameter variant: side size = max pairwise chord over the subpath nodes.
// The length coefficient always dominates the diameter coefficient.
CigarReport cigar_coefficient(const PathRecord& path, CigarVariant variant);

// Path length divided by the endpoint chord. Always >= 1. Requires at least
// two nodes; a coincident endpoint pair has no defined ratio.
double turning_coefficient(const PathRecord& path);

enum class UniformityMode { john, uniform, inner_uniform };

const char* uniformity_mode_name(UniformityMode m);
UniformityMode uniformity_mode_from_name(const std::string& name);

struct PairSample {
    Vec2 x{0, 0};
    Vec2 y{0, 0};
    double cigar = 0.0;
    double turning = 0.0;           // 0 in john mode (not evaluated)
    double M = 0.0;
};

struct UniformityEstimate {
    UniformityMode mode = UniformityMode::uniform;
    double M_hat = 0.0;             // max over usable pairs; 0 if none usable
    int pair_count = 0;             // usable (non-degenerate) pairs
    Vec2 worst_x{0, 0};
    Vec2 worst_y{0, 0};
    std::vector<PairSample> samples;
};

// Draws interior point pairs that land within snapping range of the graph.
std::vector<std::pair<Vec2, Vec2>> sample_pairs(const MetricGraph& graph,
                                                int count,
                                                std::uint64_t seed);

// Evaluates the mode's conditions on quasihyperbolic geodesics between the
// given point pairs and reports the worst coefficient seen. Pairs whose
// snapped endpoints coincide or sit closer than two cell widths are skipped;
// pair_count reports how many were actually used. The estimate is a sampled
// maximum, hence a lower bound for the true constant.
//   john          length cigar only
//   uniform       max(length cigar, length / chord)
//   inner_uniform max(length cigar, length / inner distance)
UniformityEstimate estimate_uniformity(const MetricGraph& graph,
                                       UniformityMode mode,
                                       const std::vector<std::pair<Vec2, Vec2>>& pairs);

// Convenience: samples `pairs` seeded pairs, then evaluates as above.
UniformityEstimate estimate_uniformity(const MetricGraph& graph,
                                       UniformityMode mode,
                                       int pairs,
                                       std::uint64_t seed);

// One row per evaluated pair:
//   domain,mode,xa,ya,xb,yb,cigar,turning,M
// '.' decimal separator, '\n' newlines, header line included.
std::string uniformity_csv(const std::string& domain_id,
                           const UniformityEstimate& estimate);

}  // namespace qhgeo
