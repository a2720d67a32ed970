#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "qhgeo/conditions.hpp"
#include "qhgeo/domain.hpp"
#include "qhgeo/errors.hpp"
#include "qhgeo/grid.hpp"
#include "qhgeo/maps.hpp"
#include "qhgeo/metrics.hpp"

using namespace qhgeo;

namespace {

MetricGraph disk_graph(double radius, double h, int depth) {
    GridParams gp;
    gp.h_coarse = h;
    gp.max_depth = depth;
    return build_graph(DomainSpec::disk({0.0, 0.0}, radius), gp);
}

// Every stride-th node as a (p, p) correspondence.
SampledMap identity_map(const MetricGraph& g, std::size_t count) {
    SampledMap m;
    const std::size_t stride = std::max<std::size_t>(1, g.node_count() / count);
    for (std::size_t i = 0; i < g.node_count() && m.interior_pairs.size() < count; i += stride)
        m.interior_pairs.emplace_back(g.node(i).p, g.node(i).p);
    m.label = "identity";
    return m;
}

Eigen::MatrixXd table_from_points_1d(const std::vector<double>& xs) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            d(i, j) = std::abs(xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)]);
    return d;
}

Eigen::MatrixXd elementwise_pow(const Eigen::MatrixXd& d, double e) {
    Eigen::MatrixXd out = d;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) out(i, j) = std::pow(d(i, j), e);
    return out;
}

}  // namespace

TEST_CASE("sampled map validation") {
    const DomainSpec disk = DomainSpec::disk({0.0, 0.0}, 1.0);
    const DomainSpec rect = DomainSpec::rectangle({-1.0, -1.0}, {1.0, 1.0});

    SampledMap ok;
    ok.interior_pairs = {{{0.1, 0.1}, {0.2, 0.2}}, {{-0.3, 0.0}, {0.5, -0.5}}};
    ok.boundary_pairs = {{{1.0, 0.0}, {1.0, 0.0}}, {{0.0, 1.0}, {-1.0, 0.5}}};
    CHECK_NOTHROW(ok.validate(disk, rect));

    SampledMap outside = ok;
    outside.interior_pairs.push_back({{2.0, 0.0}, {0.0, 0.0}});
    CHECK_THROWS_WITH_AS(outside.validate(disk, rect), doctest::Contains("point-outside-domain"),
                         Error);

    SampledMap off_boundary = ok;
    off_boundary.boundary_pairs.push_back({{0.5, 0.5}, {1.0, 1.0}});
    CHECK_THROWS_WITH_AS(off_boundary.validate(disk, rect), doctest::Contains("off the boundary"),
                         Error);

    SampledMap dup = ok;
    dup.interior_pairs.push_back({{0.1, 0.1}, {0.7, 0.0}});
    CHECK_THROWS_WITH_AS(dup.validate(disk, rect), doctest::Contains("duplicated"), Error);
}

TEST_CASE("sampled map json round trip") {
    SampledMap m;
    m.interior_pairs = {{{0.125, -0.25}, {0.5, 0.75}}, {{-0.0625, 0.0}, {0.1, 0.2}}};
    m.boundary_pairs = {{{1.0, 0.0}, {0.0, 1.0}}};
    m.label = "round-trip";

    const std::string text = m.to_json_text();
    CHECK(text.find("qhgeo-map/1") != std::string::npos);

    const SampledMap back = SampledMap::from_json_text(text);
    REQUIRE(back.interior_pairs.size() == 2);
    REQUIRE(back.boundary_pairs.size() == 1);
    CHECK(back.label == "round-trip");
    CHECK(back.interior_pairs[0].first == m.interior_pairs[0].first);
    CHECK(back.interior_pairs[1].second == m.interior_pairs[1].second);
    CHECK(back.boundary_pairs[0].second == m.boundary_pairs[0].second);

    CHECK_THROWS_WITH_AS(SampledMap::from_json_text("not json"), doctest::Contains("malformed"),
                         Error);
    CHECK_THROWS_WITH_AS(SampledMap::from_json_text(R"({"interior_pairs": [[1, 2]]})"),
                         doctest::Contains("malformed"), Error);
}

TEST_CASE("quasihyperbolicity coefficient on identity and exact similarity") {
    const MetricGraph g1 = disk_graph(1.0, 0.1, 3);

    SampledMap too_few;
    too_few.interior_pairs = {{{0.0, 0.0}, {0.0, 0.0}}};
    CHECK_THROWS_WITH_AS(quasihyperbolicity_coefficient(g1, g1, too_few),
                         doctest::Contains("too-few-pairs"), Error);

    const SampledMap ident = identity_map(g1, 12);
    CHECK(quasihyperbolicity_coefficient(g1, g1, ident) == 1.0);

    // Doubling is bitwise exact, so the coefficient degenerates to 1 exactly.
    const MetricGraph g2 = disk_graph(2.0, 0.2, 3);
    REQUIRE(g2.node_count() == g1.node_count());
    SampledMap shrink;
    const std::size_t stride = std::max<std::size_t>(1, g2.node_count() / 12);
    for (std::size_t i = 0; i < g2.node_count() && shrink.interior_pairs.size() < 12; i += stride)
        shrink.interior_pairs.emplace_back(g2.node(i).p, g1.node(i).p);
    CHECK(quasihyperbolicity_coefficient(g2, g1, shrink) == 1.0);
}

TEST_CASE("quasihyperbolicity coefficient of the disk inside the square") {
    const MetricGraph disk = disk_graph(1.0, 0.15, 3);
    GridParams gp;
    gp.h_coarse = 0.15;
    gp.max_depth = 3;
    const MetricGraph square = build_graph(DomainSpec::rectangle({-1.0, -1.0}, {1.0, 1.0}), gp);

    SampledMap incl;
    for (std::size_t i = 0; i < disk.node_count() && incl.interior_pairs.size() < 14; ++i) {
        const Vec2 p = disk.node(i).p;
        if (p.norm() <= 0.8 && (incl.interior_pairs.empty() ||
                                (incl.interior_pairs.back().first - p).norm() > 0.2))
            incl.interior_pairs.emplace_back(p, p);
    }
    REQUIRE(incl.interior_pairs.size() >= 8);

    const double L = quasihyperbolicity_coefficient(disk, square, incl);
    CHECK(L > 1.0);
    CHECK(L < 20.0);

    const double L_fine =
        quasihyperbolicity_coefficient(refine(disk, 2), refine(square, 2), incl);
    CHECK(L_fine == doctest::Approx(L).epsilon(0.25));
}

TEST_CASE("rough qi fit recovers exact relations") {
    CHECK_THROWS_WITH_AS(rough_qi_parameters(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 3)),
                         doctest::Contains("square"), Error);
    CHECK_THROWS_WITH_AS(rough_qi_parameters(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)),
                         doctest::Contains("index set"), Error);
    CHECK_THROWS_WITH_AS(rough_qi_parameters(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)),
                         doctest::Contains("too-few-pairs"), Error);

    const Eigen::MatrixXd d = table_from_points_1d({0.0, 0.0, 1.0, 2.0, 3.0});
    const auto [l_same, k_same] = rough_qi_parameters(d, d);
    CHECK(l_same == 1.0);
    CHECK(k_same == 0.0);

    // The coincident point pins the additive offset; no slope can trade it away.
    Eigen::MatrixXd shifted = d;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            if (i != j) shifted(i, j) = d(i, j) + 5.0;
    const auto [l_shift, k_shift] = rough_qi_parameters(d, shifted);
    CHECK(l_shift == 1.0);
    CHECK(k_shift == 5.0);
}

TEST_CASE("rough qi fit recovers a noisy doubling") {
    std::mt19937_64 rng(20260819);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    std::vector<double> xs(15);
    for (double& x : xs) x = coord(rng);
    const Eigen::MatrixXd d = table_from_points_1d(xs);

    Eigen::MatrixXd dd = 2.0 * d;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
            const double u = noise(rng);
            dd(i, j) += u;
            dd(j, i) += u;
        }

    const auto [L, K] = rough_qi_parameters(d, dd);
    CHECK(L >= 1.8);
    CHECK(L <= 2.2);
    CHECK(K <= 1.2);

    // Both sandwich inequalities hold on every pair.
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
            CHECK(dd(i, j) <= L * d(i, j) + K + 1e-9);
            CHECK(dd(i, j) >= d(i, j) / L - K - 1e-9);
        }
}

TEST_CASE("quasisymmetry envelope basics") {
    CHECK_THROWS_WITH_AS(qs_envelope(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2), 10, 1, 8),
                         doctest::Contains("too-few-points"), Error);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<double> xs(25);
    for (double& x : xs) x = coord(rng);
    const Eigen::MatrixXd d = table_from_points_1d(xs);

    const QsEnvelope ident = qs_envelope(d, d, 2000, 11, 60);
    CHECK(ident.triple_count > 500);
    for (const QsBin& b : ident.bins)
        if (b.count > 0) {
            CHECK(b.max_ratio <= b.t_high * (1.0 + 1e-12));
            CHECK(b.max_ratio >= b.t_low * (1.0 - 1e-12));
        }

    // eta_hat is the running max, so it is monotone in t.
    double prev = 0.0;
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double v = ident.eta_hat_at(t);
        CHECK(v >= prev);
        prev = v;
    }

    const QsEnvelope sqrtmap = qs_envelope(d, elementwise_pow(d, 0.5), 2000, 11, 60);
    for (const QsBin& b : sqrtmap.bins)
        if (b.count > 0) {
            CHECK(b.max_ratio <= std::sqrt(b.t_high) * (1.0 + 1e-9));
            CHECK(b.max_ratio >= std::sqrt(b.t_low) * (1.0 - 1e-9));
        }

    const QsEnvelope scaled = qs_envelope(d, 3.0 * d, 2000, 11, 60);
    for (const QsBin& b : scaled.bins)
        if (b.count > 0) CHECK(b.max_ratio <= b.t_high * (1.0 + 1e-9));
}

TEST_CASE("quasisymmetry envelope composes submultiplicatively") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> angle(0.0, 6.28318);
    std::vector<double> xs(40);
    for (double& x : xs) x = angle(rng);
    const Eigen::MatrixXd d = table_from_points_1d(xs);
    const Eigen::MatrixXd mid = elementwise_pow(d, 0.7);
    const Eigen::MatrixXd dst = elementwise_pow(mid, 0.6);

    const QsEnvelope ef = qs_envelope(d, mid, 3000, 17, 60);
    const QsEnvelope eg = qs_envelope(mid, dst, 3000, 17, 60);
    const QsEnvelope ec = qs_envelope(d, dst, 3000, 17, 60);

    // Same seed, same triples: each composite ratio is bounded through the
    // two stage envelopes.
    for (const QsBin& b : ec.bins)
        if (b.count > 0)
            CHECK(b.max_ratio <= eg.eta_hat_at(ef.eta_hat_at(b.t_high)) * (1.0 + 1e-12));

    // Swapping the roles leaves every populated bin finite.
    const QsEnvelope swapped = qs_envelope(mid, d, 3000, 17, 60);
    CHECK(swapped.triple_count > 500);
    for (const QsBin& b : swapped.bins)
        if (b.count > 0) CHECK(std::isfinite(b.max_ratio));
}

TEST_CASE("pullback through the identity reproduces direct cigar reports") {
    const MetricGraph g = disk_graph(1.0, 0.1, 3);
    SampledMap full;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        full.interior_pairs.emplace_back(g.node(i).p, g.node(i).p);

    const PullbackCigarSummary got = pullback_geodesic_cigar(g, g, full, 10, 3);
    CHECK(got.pair_count == 10);

    CigarReport want_len, want_dia;
    want_len.variant = CigarVariant::length;
    want_dia.variant = CigarVariant::diameter;
    for (const auto& [a, b] : sample_pairs(g, 10, 3)) {
        const PathRecord rec = geodesic(g, a, b, Metric::quasihyperbolic());
        const CigarReport len = cigar_coefficient(rec, CigarVariant::length);
        const CigarReport dia = cigar_coefficient(rec, CigarVariant::diameter);
        if (len.coefficient > want_len.coefficient) want_len = len;
        if (dia.coefficient > want_dia.coefficient) want_dia = dia;
    }
    CHECK(got.length.coefficient == want_len.coefficient);
    CHECK(got.diameter.coefficient == want_dia.coefficient);
    CHECK(got.length.coefficient >= got.diameter.coefficient);
    CHECK(got.diameter.coefficient > 0.0);
}

TEST_CASE("pullback cigar coefficients are similarity invariant") {
    const MetricGraph small = disk_graph(1.0, 0.1, 3);
    const MetricGraph big = disk_graph(2.0, 0.2, 3);
    REQUIRE(big.node_count() == small.node_count());

    SampledMap ident, halve;
    for (std::size_t i = 0; i < small.node_count(); ++i) {
        ident.interior_pairs.emplace_back(small.node(i).p, small.node(i).p);
        halve.interior_pairs.emplace_back(big.node(i).p, small.node(i).p);
    }

    const PullbackCigarSummary base = pullback_geodesic_cigar(small, small, ident, 8, 5);
    const PullbackCigarSummary scaled = pullback_geodesic_cigar(big, small, halve, 8, 5);
    CHECK(scaled.pair_count == base.pair_count);
    CHECK(scaled.length.coefficient == base.length.coefficient);
    CHECK(scaled.diameter.coefficient == base.diameter.coefficient);
}

TEST_CASE("pullback degenerate and uncovered cases") {
    const MetricGraph g = disk_graph(1.0, 0.1, 3);

    // A single correspondence pulls every waypoint to one node.
    SampledMap collapse;
    collapse.interior_pairs = {{{0.25, 0.0}, {0.0, 0.0}}};
    const PullbackCigarSummary c = pullback_geodesic_cigar(g, g, collapse, 2, 9);
    CHECK(c.pair_count == 2);
    CHECK(c.length.coefficient == 0.0);
    CHECK(c.diameter.coefficient == 0.0);

    // Images confined to the far left cannot cover disk-wide geodesics.
    SampledMap partial;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (g.node(i).p.x() < -0.5) partial.interior_pairs.emplace_back(g.node(i).p, g.node(i).p);
    REQUIRE(partial.interior_pairs.size() >= 10);
    CHECK_THROWS_WITH_AS(pullback_geodesic_cigar(g, g, partial, 10, 3),
                         doctest::Contains("unmatched-waypoint"), Error);

    SampledMap empty;
    CHECK_THROWS_WITH_AS(pullback_geodesic_cigar(g, g, empty, 4, 1),
                         doctest::Contains("too-few-pairs"), Error);
}

TEST_CASE("destination-uniformity verdict accepts the disk and flags the comb") {
    const MetricGraph disk = disk_graph(1.0, 0.1, 4);
    const DomainSpec disk_spec = DomainSpec::disk({0.0, 0.0}, 1.0);

    SampledMap ident = identity_map(disk, 12);
    for (const Vec2& b : disk_spec.boundary_sample(12, 5)) ident.boundary_pairs.emplace_back(b, b);

    const VerdictThresholds defaults;
    const PropertyVerdict good = property_b_verdict(disk, disk, ident, defaults);
    REQUIRE(good.checks.size() == 3);
    CHECK(good.checks[0].name == "uniformity");
    CHECK(good.checks[1].name == "quasihyperbolicity");
    CHECK(good.checks[2].name == "boundary-quasisymmetry");
    for (const PropertyCheck& c : good.checks) CHECK(c.pass);
    CHECK(good.overall == VerdictOutcome::pass);

    // Same thresholds, comb target: the uniformity check must fail.
    GridParams gp;
    gp.h_coarse = 0.1;
    gp.max_depth = 7;
    const MetricGraph comb5 = build_graph(DomainSpec::comb(5), gp);
    const DomainSpec comb_spec = DomainSpec::comb(5);

    SampledMap into_comb;
    const std::size_t stride = std::max<std::size_t>(1, comb5.node_count() / 8);
    std::size_t taken = 0;
    for (std::size_t i = 0; i < disk.node_count() && taken < 8; i += disk.node_count() / 8, ++taken)
        into_comb.interior_pairs.emplace_back(disk.node(i).p, comb5.node(taken * stride).p);
    const auto src_b = disk_spec.boundary_sample(8, 6);
    const auto dst_b = comb_spec.boundary_sample(8, 6);
    for (std::size_t i = 0; i < 8; ++i) into_comb.boundary_pairs.emplace_back(src_b[i], dst_b[i]);

    const PropertyVerdict bad = property_b_verdict(disk, comb5, into_comb, defaults);
    CHECK(bad.checks[0].name == "uniformity");
    CHECK_FALSE(bad.checks[0].pass);
    CHECK(bad.checks[0].measured > defaults.max_uniformity);
    CHECK(bad.overall == VerdictOutcome::fail);

    // Without boundary samples the third check cannot run.
    SampledMap no_boundary = into_comb;
    no_boundary.boundary_pairs.clear();
    const PropertyVerdict open = property_b_verdict(disk, comb5, no_boundary, defaults);
    CHECK(open.checks[2].name == "boundary-quasisymmetry");
    CHECK(std::isnan(open.checks[2].measured));
    CHECK(open.overall == VerdictOutcome::inconclusive);
}

TEST_CASE("visual-structure verdict on the disk") {
    const MetricGraph g = disk_graph(1.0, 0.1, 4);
    const BasePoint base = choose_base_point(g);

    std::vector<Vec2> anchors;
    for (int k = 0; k < 32; ++k) {
        const double a = 2.0 * 3.14159265358979323846 * k / 32;
        anchors.push_back({std::cos(a), std::sin(a)});
    }

    const VerdictThresholds defaults;
    const PropertyVerdict v = property_a_verdict(g, base, 0.2, anchors, defaults);
    REQUIRE(v.checks.size() == 2);
    CHECK(v.checks[0].name == "hyperbolicity");
    CHECK(v.checks[1].name == "visual-boundary-quasisymmetry");
    for (const PropertyCheck& c : v.checks) CHECK(c.pass);
    CHECK(v.overall == VerdictOutcome::pass);

    const std::vector<Vec2> two{anchors[0], anchors[16]};
    CHECK_THROWS_WITH_AS(property_a_verdict(g, base, 0.2, two, defaults),
                         doctest::Contains("too-few-points"), Error);
    CHECK_THROWS_WITH_AS(property_a_verdict(g, base, 0.0, anchors, defaults),
                         doctest::Contains("tau"), Error);
}

TEST_CASE("verdict json shape and determinism") {
    const MetricGraph g = disk_graph(1.0, 0.15, 3);
    const DomainSpec spec = DomainSpec::disk({0.0, 0.0}, 1.0);

    SampledMap ident = identity_map(g, 10);
    for (const Vec2& b : spec.boundary_sample(8, 2)) ident.boundary_pairs.emplace_back(b, b);

    VerdictThresholds t;
    t.pairs = 30;
    t.triples = 400;
    const PropertyVerdict v1 = property_b_verdict(g, g, ident, t);
    const PropertyVerdict v2 = property_b_verdict(g, g, ident, t);
    CHECK(v1.to_json_text() == v2.to_json_text());

    const auto j = nlohmann::json::parse(v1.to_json_text());
    CHECK(j.at("schema") == "qhgeo-verdict/1");
    CHECK(j.at("property") == "B");
    CHECK(j.at("checks").size() == 3);
    CHECK(j.at("checks")[0].contains("measured"));
    CHECK(j.at("checks")[0].contains("threshold"));
    const std::string overall = j.at("overall").get<std::string>();
    CHECK((overall == "pass" || overall == "fail" || overall == "inconclusive"));
}
