#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qhgeo/conditions.hpp"
#include "qhgeo/grid.hpp"
#include "qhgeo/gromov.hpp"

namespace qhgeo {

// A map between two domains given by samples: pointwise correspondences for
// the interior and for the boundary. Source points must be distinct.
struct SampledMap {
    std::vector<std::pair<Vec2, Vec2>> interior_pairs;  // (point in G, image in Y)
    std::vector<std::pair<Vec2, Vec2>> boundary_pairs;
    std::string label;

    // Containment and duplicate checks against the two domains.
    void validate(const DomainSpec& src, const DomainSpec& dst) const;

    static SampledMap from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct QsBin {
    double t_low = 0.0;
    double t_high = 0.0;
    double max_ratio = 0.0;  // max destination ratio seen for source ratios in [t_low, t_high)
    long count = 0;          // triples that landed here
};

// Empirical quasisymmetry envelope: for sampled triples, the worst
// destination ratio per logarithmic source-ratio bin.
struct QsEnvelope {
    std::vector<QsBin> bins;  // ordered, disjoint, covering [1e-3, 1e3]
    long triple_count = 0;    // usable triples (non-degenerate, in range)

    // Minimal monotone majorant of the per-bin maxima at source ratio t:
    // the running max over populated bins up to the one containing t.
    double eta_hat_at(double t) const;
};

struct PropertyCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;  // NaN when the check could not be evaluated
    double threshold = 0.0;
};

enum class VerdictOutcome { pass, fail, inconclusive };

enum class PropertyTag { A, B };

struct PropertyVerdict {
    PropertyTag property = PropertyTag::A;
    std::vector<PropertyCheck> checks;
    VerdictOutcome overall = VerdictOutcome::inconclusive;

    std::string to_json_text() const;
};

// Effort knobs and pass thresholds for the verdict pipelines. Defaults are
// calibrated so the stock examples behave as documented.
struct VerdictThresholds {
    double max_delta = 2.0;              // hyperbolicity residual cap
    double max_uniformity = 10.0;        // uniform-mode M_hat cap
    double max_quasihyperbolicity = 4.0; // L_hat cap
    double max_envelope = 200.0;         // cap on the worst envelope ratio
    int pairs = 80;
    long quadruples = 1500;
    int triples = 1500;
    int bins = 60;
    std::uint64_t seed = 1;
};

// Smallest L >= 1 with L^-1 k_G(x,y) <= k_Y(x',y') <= L k_G(x,y) over all
// pairs of map samples. Pairs below the resolution floor (quasihyperbolic
// distance under three max edge weights) are skipped on either side.
double quasihyperbolicity_coefficient(const MetricGraph& graph_src, const MetricGraph& graph_dst,
                                      const SampledMap& m);

// Minimal-K rough quasi-isometry fit over a fixed multiplicative grid of L
// candidates; returns (L, K) minimizing K, then L. Both sandwich
// inequalities hold on every table pair.
std::pair<double, double> rough_qi_parameters(const Eigen::MatrixXd& dist_src,
                                              const Eigen::MatrixXd& dist_dst);

// Ratio-transfer envelope over seeded index triples (a, x, b):
// t = d(a,x)/d(x,b) against t' = d'(a',x')/d'(x',b').
QsEnvelope qs_envelope(const Eigen::MatrixXd& dist_src, const Eigen::MatrixXd& dist_dst,
                       int triples, std::uint64_t seed, int bins);

struct PullbackCigarSummary {
    CigarReport length;    // worst length-variant report over sampled pairs
    CigarReport diameter;  // worst diameter-variant report
    int pair_count = 0;
};

// Transports destination geodesics back through the sampled correspondence
// and measures the cigar coefficients of the resulting source paths.
PullbackCigarSummary pullback_geodesic_cigar(const MetricGraph& graph_src,
                                             const MetricGraph& graph_dst, const SampledMap& m,
                                             int pairs, std::uint64_t seed);

// Three checks: destination uniformity, interior quasihyperbolicity, and
// boundary quasisymmetry (source inner boundary metric against destination
// chords). Pass iff all hold; inconclusive when a check cannot run.
PropertyVerdict property_b_verdict(const MetricGraph& graph_src, const MetricGraph& graph_dst,
                                   const SampledMap& m, const VerdictThresholds& thresholds);

// Two checks: hyperbolicity of the quasihyperbolized domain and
// quasisymmetry between the visual structure at the base point and the inner
// boundary metric on the anchors.
PropertyVerdict property_a_verdict(const MetricGraph& graph, const BasePoint& base, double tau,
                                   const std::vector<Vec2>& anchors,
                                   const VerdictThresholds& thresholds);

}  // namespace qhgeo
