#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <vector>

#include "qhgeo/domain.hpp"
#include "qhgeo/errors.hpp"
#include "qhgeo/grid.hpp"
#include "qhgeo/gromov.hpp"
#include "qhgeo/metrics.hpp"

using namespace qhgeo;

namespace {

GridParams coarse_params(double h, int depth) {
    GridParams gp;
    gp.h_coarse = h;
    gp.max_depth = depth;
    return gp;
}

const MetricGraph& disk_graph() {
    static MetricGraph g = build_graph(DomainSpec::disk(Vec2(0, 0), 1.0), coarse_params(0.1, 4));
    return g;
}

std::vector<Vec2> circle_anchors(int m) {
    std::vector<Vec2> a;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * M_PI * k / m;
        a.emplace_back(std::cos(t), std::sin(t));
    }
    return a;
}

}  // namespace

TEST_CASE("base point sits at the deepest node") {
    const BasePoint bd = choose_base_point(disk_graph());
    CHECK(disk_graph().node(bd.w0).p.norm() <= 0.051);
    CHECK(bd.delta_sigma == doctest::Approx(1.0).epsilon(0.06));

    const MetricGraph rect =
        build_graph(DomainSpec::rectangle(Vec2(0, 0), Vec2(2, 1)), coarse_params(0.1, 3));
    const BasePoint br = choose_base_point(rect);
    const Vec2 p = rect.node(br.w0).p;
    CHECK(p.y() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(p.x() >= 0.45);
    CHECK(p.x() <= 1.55);
    CHECK(br.delta_sigma == doctest::Approx(0.5).epsilon(1e-9));
    // ties on the midline plateau resolve to the smallest node id
    CHECK(p.x() == doctest::Approx(0.5).epsilon(1e-9));

    const MetricGraph comb = build_graph(DomainSpec::comb(3), coarse_params(0.1, 5));
    CHECK(choose_base_point(comb).delta_sigma > 0.0);
}

TEST_CASE("gromov product basics") {
    const MetricGraph& g = disk_graph();
    const Vec2 p(0.3, 0.2), y(-0.5, 0.1);
    CHECK(gromov_product(g, p, p, y) == 0.0);
    CHECK(gromov_product(g, p, y, p) == 0.0);

    // symmetry is bitwise, bounds hold up to discretization noise
    const Vec2 x(0.6, -0.4);
    const double pxy = gromov_product(g, p, x, y);
    CHECK(pxy == gromov_product(g, p, y, x));
    CHECK(pxy >= -1e-9);
    const double kxp = quasihyperbolic_distance(g, x, p);
    const double kyp = quasihyperbolic_distance(g, y, p);
    CHECK(pxy <= std::min(kxp, kyp) + 1e-9);
}

TEST_CASE("gromov product over a raw metric matrix") {
    // collinear reals 0, 3, 5 under |.|
    Eigen::MatrixXd d(3, 3);
    d << 0, 3, 5,
         3, 0, 2,
         5, 2, 0;
    CHECK(gromov_product(d, 0, 1, 2) == 3.0);
    CHECK(gromov_product(d, 1, 0, 2) == 0.0);

    Eigen::MatrixXd bad(2, 3);
    bad.setZero();
    CHECK_THROWS_WITH_AS(gromov_product(bad, 0, 0, 1), doctest::Contains("square"), Error);
}

TEST_CASE("antipodal near-boundary points have a small product at the center") {
    const MetricGraph& g1 = disk_graph();
    const MetricGraph g2 = refine(g1, 2.0);
    const Vec2 p(0, 0), x(0.9, 0), y(-0.9, 0);

    const double prod1 = gromov_product(g1, p, x, y);
    const double prod2 = gromov_product(g2, p, x, y);
    const double kxp = quasihyperbolic_distance(g1, x, p);

    CHECK(prod1 < kxp / 4.0);
    CHECK(prod2 < kxp / 4.0);
    CHECK(std::abs(prod1 - prod2) <= 0.2);
}

TEST_CASE("exact tree metrics have zero delta") {
    // path metric on 8 points
    Eigen::MatrixXd path(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) path(i, j) = std::abs(i - j);
    CHECK(estimate_delta(path, 500, 1ULL).delta_hat == 0.0);

    // star: hub 0, three leaves at distance 1
    Eigen::MatrixXd star(4, 4);
    star << 0, 1, 1, 1,
            1, 0, 2, 2,
            1, 2, 0, 2,
            1, 2, 2, 0;
    CHECK(estimate_delta(star, 500, 2ULL).delta_hat == 0.0);

    Eigen::MatrixXd bad(3, 4);
    bad.setZero();
    CHECK_THROWS_AS(estimate_delta(bad, 10, 0ULL), Error);
}

TEST_CASE("a long thin rectangle is nearly tree-like") {
    const MetricGraph strip =
        build_graph(DomainSpec::rectangle(Vec2(0, 0), Vec2(6, 0.5)), coarse_params(0.25, 3));
    const DeltaEstimate est = estimate_delta(strip, 1500, 3ULL);
    CHECK(est.delta_hat >= 0.0);
    CHECK(est.delta_hat <= 2.0);
}

TEST_CASE("disk delta is stable under refinement") {
    const MetricGraph& g1 = disk_graph();
    const MetricGraph g2 = refine(g1, 2.0);
    const DeltaEstimate e1 = estimate_delta(g1, 2000, 7ULL);
    const DeltaEstimate e2 = estimate_delta(g2, 2000, 7ULL);
    CHECK(e1.delta_hat > 0.0);
    CHECK(std::abs(e1.delta_hat - e2.delta_hat) <= 0.15 * std::max(e1.delta_hat, e2.delta_hat));
}

TEST_CASE("delta estimates grow monotonically with the sample") {
    const MetricGraph& g = disk_graph();
    const DeltaEstimate small = estimate_delta(g, 300, 42ULL);
    const DeltaEstimate large = estimate_delta(g, 1500, 42ULL);
    CHECK(small.quadruple_count == 300);
    CHECK(large.quadruple_count == 1500);
    CHECK(small.delta_hat <= large.delta_hat);
}

TEST_CASE("quasihyperbolic quantities are scale invariant") {
    // doubling is exact in binary floating point, so everything matches bitwise
    const MetricGraph g1 = build_graph(DomainSpec::disk(Vec2(0, 0), 1.0), coarse_params(0.1, 3));
    const MetricGraph g2 = build_graph(DomainSpec::disk(Vec2(0, 0), 2.0), coarse_params(0.2, 3));
    REQUIRE(g1.node_count() == g2.node_count());

    const Vec2 x(0.62, -0.31), y(-0.47, 0.55), p(0.11, 0.02);
    CHECK(quasihyperbolic_distance(g1, x, y) ==
          doctest::Approx(quasihyperbolic_distance(g2, 2 * x, 2 * y)).epsilon(1e-12));
    CHECK(gromov_product(g1, p, x, y) ==
          doctest::Approx(gromov_product(g2, 2 * p, 2 * x, 2 * y)).epsilon(1e-12));

    const DeltaEstimate d1 = estimate_delta(g1, 800, 9ULL);
    const DeltaEstimate d2 = estimate_delta(g2, 800, 9ULL);
    CHECK(d1.delta_hat == doctest::Approx(d2.delta_hat).epsilon(1e-12));
}

TEST_CASE("visual table structure") {
    const MetricGraph& g = disk_graph();
    const BasePoint base = choose_base_point(g);
    const std::vector<Vec2> anchors = circle_anchors(8);

    const VisualTable vt = visual_table(g, base, 0.5, anchors, 4);
    REQUIRE(vt.rho.rows() == 8);
    CHECK((vt.rho - vt.rho.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((vt.products - vt.products.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j) {
            CHECK(vt.rho(i, j) > 0.0);
            CHECK(vt.rho(i, j) == std::exp(-0.5 * vt.products(i, j)));
            if (vt.products(i, j) >= 0.0) CHECK(vt.rho(i, j) <= 1.0);
        }

    // deeper boundary approach drives the self-product up, rho(i,i) down
    const VisualTable deeper = visual_table(g, base, 0.5, anchors, 6);
    for (Eigen::Index i = 0; i < 8; ++i) CHECK(deeper.rho(i, i) < vt.rho(i, i));

    // larger tau shrinks every off-diagonal entry with positive product
    const VisualTable hotter = visual_table(g, base, 1.0, anchors, 4);
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            if (i != j && vt.products(i, j) > 1e-9) CHECK(hotter.rho(i, j) < vt.rho(i, j));
}

TEST_CASE("visual table rejects bad inputs") {
    const MetricGraph& g = disk_graph();
    const BasePoint base = choose_base_point(g);
    const std::vector<Vec2> anchors = circle_anchors(4);
    CHECK_THROWS_WITH_AS(visual_table(g, base, 0.0, anchors, 4),
                         doctest::Contains("tau"), Error);
    CHECK_THROWS_WITH_AS(visual_table(g, base, -1.0, anchors, 4),
                         doctest::Contains("tau"), Error);
    CHECK_THROWS_AS(visual_table(g, base, 0.5, {}, 4), Error);
    CHECK_THROWS_WITH_AS(visual_table(g, base, 0.5, {Vec2(0, 0)}, 4),
                         doctest::Contains("anchor-approach-failure"), Error);
}

TEST_CASE("visual table csv carries tau, anchors, and the matrix") {
    const MetricGraph& g = disk_graph();
    const VisualTable vt = visual_table(g, choose_base_point(g), 0.25, circle_anchors(4), 4);
    const std::string csv = vt.to_csv();
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("tau,0.25", 0) == 0);
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("anchors,", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("starlikeness probe shrinks with anchor coverage") {
    const MetricGraph& g = disk_graph();
    const BasePoint base = choose_base_point(g);

    const double k8 = starlikeness_probe(g, base, circle_anchors(8), 200, 5ULL);
    const double k16 = starlikeness_probe(g, base, circle_anchors(16), 200, 5ULL);
    CHECK(k8 >= 0.0);
    CHECK(k16 <= k8 + 1e-12);
    CHECK(k16 == starlikeness_probe(g, base, circle_anchors(16), 200, 5ULL));
    CHECK(std::isfinite(k8));
}

TEST_CASE("delta estimate serializes as a json record") {
    const DeltaEstimate est = estimate_delta(disk_graph(), 50, 13ULL);
    const std::string text = est.to_json_text();
    CHECK(text.find("\"schema\": \"qhgeo-delta/1\"") != std::string::npos);
    CHECK(text.find("\"delta_hat\"") != std::string::npos);
    CHECK(text.find("\"quadruple_count\": 50") != std::string::npos);
    CHECK(text.find("\"worst_quadruple\"") != std::string::npos);
}
