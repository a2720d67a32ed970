#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "qhgeo/conditions.hpp"
#include "qhgeo/constants.hpp"
#include "qhgeo/domain.hpp"
#include "qhgeo/errors.hpp"
#include "qhgeo/grid.hpp"
#include "qhgeo/gromov.hpp"
#include "qhgeo/maps.hpp"
#include "qhgeo/metrics.hpp"

using namespace qhgeo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
    std::string payload = text;
    if (payload.empty() || payload.back() != '\n') payload += '\n';
    if (out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write file: " + out_path);
    f << payload;
}

struct GridOpts {
    double h = 0.05;
    int depth = 7;
    std::string stencil = "king8";
};

void add_grid_opts(CLI::App* cmd, GridOpts& g) {
    cmd->add_option("--h", g.h, "Coarse grid spacing")->check(CLI::PositiveNumber);
    cmd->add_option("--depth", g.depth, "Refinement depth toward the boundary")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--stencil", g.stencil, "Neighbor stencil")
        ->check(CLI::IsMember({"axis4", "king8", "knight16"}));
}

MetricGraph load_graph(const std::string& domain_path, const GridOpts& opts) {
    const DomainSpec spec = DomainSpec::from_json_text(read_file(domain_path));
    GridParams gp;
    gp.h_coarse = opts.h;
    gp.max_depth = opts.depth;
    gp.neighbor_stencil = stencil_from_name(opts.stencil);
    return build_graph(spec, gp);
}

Vec2 as_point(const std::vector<double>& coords, const char* flag) {
    if (coords.size() != 2)
        throw std::runtime_error(std::string(flag) + " expects X,Y coordinates");
    return Vec2(coords[0], coords[1]);
}

Metric select_metric(const std::string& name, const MetricGraph& graph, double epsilon,
                     const std::vector<double>& base) {
    if (name == "inner") return Metric::inner();
    if (name == "qh") return Metric::quasihyperbolic();
    DeformSpec spec;
    spec.epsilon = epsilon;
    if (!(epsilon > 0.0))
        throw Error(ErrorCode::NonpositiveEpsilon,
                    "the deformed metric needs --epsilon greater than zero");
    spec.base_point = base.empty() ? choose_base_point(graph).w0 : graph.snap(as_point(base, "--base"));
    return Metric::deformed(spec);
}

nlohmann::ordered_json point_json(const Vec2& p) { return {p.x(), p.y()}; }

int run_domain_info(const std::string& domain_path, const GridOpts& grid,
                    const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const DomainSpec& spec = g.domain();
    const BasePoint base = choose_base_point(g);

    double min_delta = kInf, max_delta = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        min_delta = std::min(min_delta, g.node(i).delta);
        max_delta = std::max(max_delta, g.node(i).delta);
    }

    const auto [lo, hi] = spec.bounding_box();
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-domain-info/1";
    j["kind"] = spec.kind_name();
    j["bounding_box"] = {point_json(lo), point_json(hi)};
    j["boundary_components"] = spec.boundary_components().size();
    j["slits"] = spec.slits().size();
    j["grid"] = {{"h", grid.h},
                 {"depth", grid.depth},
                 {"stencil", grid.stencil},
                 {"nodes", g.node_count()},
                 {"edges", g.edge_count()},
                 {"min_delta", min_delta},
                 {"max_delta", max_delta}};
    j["base_node"] = {{"id", base.w0},
                      {"point", point_json(g.node(base.w0).p)},
                      {"clearance", base.delta_sigma}};
    emit(j.dump(2), out);
    return 0;
}

int run_dist(const std::string& domain_path, const GridOpts& grid, const std::string& metric_name,
             const std::vector<double>& from, const std::vector<double>& to, double epsilon,
             const std::vector<double>& base, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const Vec2 a = as_point(from, "--from");
    const Vec2 b = as_point(to, "--to");
    const Metric metric = select_metric(metric_name, g, epsilon, base);

    double value = 0.0;
    switch (metric.kind()) {
        case Metric::Kind::inner: value = inner_distance(g, a, b); break;
        case Metric::Kind::quasihyperbolic: value = quasihyperbolic_distance(g, a, b); break;
        case Metric::Kind::deformed: value = deformed_distance(g, metric.deform(), a, b); break;
    }

    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-dist/1";
    j["domain"] = g.domain().kind_name();
    j["metric"] = metric.name();
    if (metric.kind() == Metric::Kind::deformed) {
        j["epsilon"] = metric.deform().epsilon;
        j["base_node"] = metric.deform().base_point;
    }
    j["from"] = point_json(a);
    j["to"] = point_json(b);
    j["distance"] = value;
    emit(j.dump(2), out);
    return 0;
}

int run_geodesic(const std::string& domain_path, const GridOpts& grid,
                 const std::string& metric_name, const std::vector<double>& from,
                 const std::vector<double>& to, double epsilon, const std::vector<double>& base,
                 const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const Metric metric = select_metric(metric_name, g, epsilon, base);
    const PathRecord rec =
        geodesic(g, as_point(from, "--from"), as_point(to, "--to"), metric);
    emit(rec.to_json_text(), out);
    return 0;
}

int run_uniformity(const std::string& domain_path, const GridOpts& grid, const std::string& mode,
                   int pairs, std::uint64_t seed, double max_allowed, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const UniformityEstimate est =
        estimate_uniformity(g, uniformity_mode_from_name(mode), pairs, seed);
    emit(uniformity_csv(g.domain().kind_name(), est), out);
    if (est.M_hat > max_allowed) {
        std::cerr << "uniformity check failed: M_hat " << est.M_hat << " exceeds " << max_allowed
                  << "\n";
        return 1;
    }
    return 0;
}

int run_delta(const std::string& domain_path, const GridOpts& grid, long quadruples,
              std::uint64_t seed, double max_allowed, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const DeltaEstimate est = estimate_delta(g, quadruples, seed);
    emit(est.to_json_text(), out);
    if (est.delta_hat > max_allowed) {
        std::cerr << "hyperbolicity check failed: delta_hat " << est.delta_hat << " exceeds "
                  << max_allowed << "\n";
        return 1;
    }
    return 0;
}

int run_visual(const std::string& domain_path, const GridOpts& grid, double tau, int anchors,
               std::uint64_t seed, int approach_depth, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const BasePoint base = choose_base_point(g);
    const std::vector<Vec2> pts = g.domain().boundary_sample(anchors, seed);
    const VisualTable table = visual_table(g, base, tau, pts, approach_depth);
    emit(table.to_csv(), out);
    return 0;
}

int run_qs_check(const std::string& src_path, const std::string& dst_path,
                 const std::string& map_path, const GridOpts& grid, int triples,
                 std::uint64_t seed, int bins, double max_envelope, const std::string& out) {
    const MetricGraph gs = load_graph(src_path, grid);
    const MetricGraph gd = load_graph(dst_path, grid);
    const SampledMap map = SampledMap::from_json_text(read_file(map_path));
    map.validate(gs.domain(), gd.domain());

    const std::size_t n = map.boundary_pairs.size();
    if (n < 3)
        throw Error(ErrorCode::TooFewPoints,
                    "the quasisymmetry check needs at least three boundary pairs");

    // Source side: inner distances between the nearest graph nodes to the
    // boundary sources. Destination side: straight chords between the images.
    std::vector<std::int32_t> proxies(n);
    for (std::size_t i = 0; i < n; ++i)
        proxies[i] = gs.nearest_node(map.boundary_pairs[i].first).first;

    Eigen::MatrixXd src(n, n), dst(n, n);
    src.setZero();
    dst.setZero();
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> row = distance_table(gs, Metric::inner(), proxies[i]);
        for (std::size_t j = 0; j < n; ++j) {
            src(i, j) = row[proxies[j]];
            dst(i, j) = (map.boundary_pairs[i].second - map.boundary_pairs[j].second).norm();
        }
    }

    const QsEnvelope env = qs_envelope(src, dst, triples, seed, bins);

    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    csv.precision(17);
    csv << "t_low,t_high,count,max_ratio\n";
    double worst = 0.0;
    for (const QsBin& b : env.bins) {
        csv << b.t_low << ',' << b.t_high << ',' << b.count << ',' << b.max_ratio << '\n';
        if (b.count > 0) worst = std::max(worst, b.max_ratio);
    }
    emit(csv.str(), out);

    if (!(worst <= max_envelope)) {
        std::cerr << "quasisymmetry check failed: worst ratio " << worst << " exceeds "
                  << max_envelope << "\n";
        return 1;
    }
    return 0;
}

int run_property_a(const std::string& domain_path, const GridOpts& grid, double tau, int anchors,
                   const VerdictThresholds& th, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const BasePoint base = choose_base_point(g);
    const std::vector<Vec2> pts = g.domain().boundary_sample(anchors, th.seed);
    const PropertyVerdict v = property_a_verdict(g, base, tau, pts, th);
    emit(v.to_json_text(), out);
    return v.overall == VerdictOutcome::pass ? 0 : 1;
}

int run_property_b(const std::string& src_path, const std::string& dst_path,
                   const std::string& map_path, const GridOpts& grid,
                   const VerdictThresholds& th, const std::string& out) {
    const MetricGraph gs = load_graph(src_path, grid);
    const MetricGraph gd = load_graph(dst_path, grid);
    const SampledMap map = SampledMap::from_json_text(read_file(map_path));
    map.validate(gs.domain(), gd.domain());
    const PropertyVerdict v = property_b_verdict(gs, gd, map, th);
    emit(v.to_json_text(), out);
    return v.overall == VerdictOutcome::pass ? 0 : 1;
}

int run_constants(double M, double C, const std::string& eta_text, const std::string& out) {
    const ConstantLedger led = compute_ledger(M, C, EtaDescriptor::parse(eta_text));
    emit(led.to_json_text(), out);
    return 0;
}

int run_inequalities(const std::string& domain_path, const GridOpts& grid, int pairs,
                     std::uint64_t seed, double tol, const std::string& out) {
    const MetricGraph g = load_graph(domain_path, grid);
    const std::vector<std::pair<Vec2, Vec2>> sampled = sample_pairs(g, pairs, seed);

    // The uniformity constant is estimated on the same pair set the bounds
    // are checked on, so the sampled maximum really covers every tested pair.
    const UniformityEstimate est = estimate_uniformity(g, UniformityMode::uniform, sampled);
    if (est.pair_count == 0)
        throw Error(ErrorCode::TooFewPairs, "no usable pairs for the uniformity estimate");
    const double m_hat = std::max(1.0, est.M_hat);

    std::ostringstream csv;
    csv.imbue(std::locale::classic());
    csv.precision(17);
    csv << "pair,ux,uy,vx,vy,k,inner_len,delta_u,delta_v,"
           "r_growth_lower,r_ratio_lower,r_near_upper,r_prefix_upper,r_uniform_upper\n";

    bool violated = false;
    std::string first_violation;
    auto note = [&](std::size_t i, const char* name, double r, double allowed) {
        if (r >= -allowed) return;
        violated = true;
        if (first_violation.empty()) {
            std::ostringstream msg;
            msg << name << " residual " << r << " at pair " << i;
            first_violation = msg.str();
        }
    };

    for (std::size_t i = 0; i < sampled.size(); ++i) {
        const std::int32_t u = g.snap(sampled[i].first);
        const std::int32_t v = g.snap(sampled[i].second);
        if (u == v) continue;

        const PathRecord rec = geodesic(g, g.node(u).p, g.node(v).p, Metric::quasihyperbolic());
        const double k = rec.qh_len;
        const double du = rec.deltas.front();
        const double dv = rec.deltas.back();
        const double min_d = std::min(du, dv);
        const double chord = rec.euclid_chord;

        const double r_growth = k - std::log1p(rec.inner_len / min_d);
        const double r_ratio = k - std::fabs(std::log(du / dv));

        // Prefix constant of the geodesic itself: the smallest a >= 1 whose
        // length-versus-clearance premise this record satisfies at its nodes.
        double a_prefix = 1.0, cum = 0.0;
        for (std::size_t j = 1; j < rec.points.size(); ++j) {
            cum += (rec.points[j] - rec.points[j - 1]).norm();
            a_prefix = std::max(a_prefix, cum / rec.deltas[j]);
        }
        const double r_prefix = 4.0 * a_prefix * std::log1p(rec.inner_len / du) - k;
        const double r_uniform = 4.0 * m_hat * m_hat * std::log1p(chord / min_d) - k;

        csv << i << ',' << g.node(u).p.x() << ',' << g.node(u).p.y() << ',' << g.node(v).p.x()
            << ',' << g.node(v).p.y() << ',' << k << ',' << rec.inner_len << ',' << du << ','
            << dv << ',' << r_growth << ',' << r_ratio << ',';

        note(i, "growth lower bound", r_growth, 1e-9);
        note(i, "ratio lower bound", r_ratio, 1e-9);
        if (chord < du) {
            const double r_near = chord / (du - chord) - k;
            csv << r_near;
            note(i, "nearby-pair upper bound", r_near, tol);
        }
        csv << ',' << r_prefix << ',' << r_uniform << '\n';
        note(i, "prefix upper bound", r_prefix, tol);
        note(i, "uniformity upper bound", r_uniform, tol);
    }

    emit(csv.str(), out);
    if (violated) {
        std::cerr << "inequality check failed: " << first_violation << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasihyperbolic geometry toolkit"};
    app.require_subcommand(1);
    // --h is the grid-spacing flag, so help stays long-form only.
    app.set_help_flag("--help", "Print help");
    auto add_subcommand = [](CLI::App* parent, const std::string& name,
                             const std::string& desc) {
        CLI::App* sub = parent->add_subcommand(name, desc);
        sub->set_help_flag("--help", "Print help");
        return sub;
    };

    int exit_code = 0;

    // domain info
    auto* domain_cmd = add_subcommand(&app, "domain", "Domain inspection");
    domain_cmd->require_subcommand(1);
    auto* info_cmd = add_subcommand(domain_cmd, "info", "Summarize a domain and its grid");
    static std::string info_domain, info_out;
    static GridOpts info_grid;
    info_cmd->add_option("--domain", info_domain, "Domain spec JSON file")->required();
    add_grid_opts(info_cmd, info_grid);
    info_cmd->add_option("--out", info_out, "Write output here instead of stdout");
    info_cmd->callback([&] { exit_code = run_domain_info(info_domain, info_grid, info_out); });

    // dist / geodesic share their flag set
    static std::string pd_domain, pd_metric, pd_out;
    static GridOpts pd_grid;
    static std::vector<double> pd_from, pd_to, pd_base;
    static double pd_epsilon = 0.0;
    auto add_point_query_opts = [&](CLI::App* cmd) {
        cmd->add_option("--domain", pd_domain, "Domain spec JSON file")->required();
        cmd->add_option("--metric", pd_metric, "Path metric")
            ->required()
            ->check(CLI::IsMember({"inner", "qh", "deformed"}));
        cmd->add_option("--from", pd_from, "Start point X,Y")->required()->delimiter(',');
        cmd->add_option("--to", pd_to, "End point X,Y")->required()->delimiter(',');
        cmd->add_option("--epsilon", pd_epsilon, "Deformation strength (deformed metric)");
        cmd->add_option("--base", pd_base, "Deformation base point X,Y")->delimiter(',');
        add_grid_opts(cmd, pd_grid);
        cmd->add_option("--out", pd_out, "Write output here instead of stdout");
    };
    auto* dist_cmd = add_subcommand(&app, "dist", "Distance between two interior points");
    add_point_query_opts(dist_cmd);
    dist_cmd->callback([&] {
        exit_code =
            run_dist(pd_domain, pd_grid, pd_metric, pd_from, pd_to, pd_epsilon, pd_base, pd_out);
    });
    auto* geo_cmd = add_subcommand(&app, "geodesic", "Shortest path record between two points");
    add_point_query_opts(geo_cmd);
    geo_cmd->callback([&] {
        exit_code = run_geodesic(pd_domain, pd_grid, pd_metric, pd_from, pd_to, pd_epsilon,
                                 pd_base, pd_out);
    });

    // uniformity
    auto* uni_cmd = add_subcommand(&app, "uniformity", "Sampled cigar/turning coefficients");
    static std::string uni_domain, uni_mode = "uniform", uni_out;
    static GridOpts uni_grid;
    static int uni_pairs = 300;
    static std::uint64_t uni_seed = 1;
    static double uni_max = kInf;
    uni_cmd->add_option("--domain", uni_domain, "Domain spec JSON file")->required();
    uni_cmd->add_option("--mode", uni_mode, "Condition set")
        ->check(CLI::IsMember({"john", "uniform", "inner_uniform"}));
    uni_cmd->add_option("--pairs", uni_pairs, "Sampled point pairs")->check(CLI::PositiveNumber);
    uni_cmd->add_option("--seed", uni_seed, "Sampling seed");
    uni_cmd->add_option("--max", uni_max, "Fail when M_hat exceeds this");
    add_grid_opts(uni_cmd, uni_grid);
    uni_cmd->add_option("--out", uni_out, "Write output here instead of stdout");
    uni_cmd->callback([&] {
        exit_code =
            run_uniformity(uni_domain, uni_grid, uni_mode, uni_pairs, uni_seed, uni_max, uni_out);
    });

    // delta
    auto* delta_cmd = add_subcommand(&app, "delta", "Sampled four-point hyperbolicity residual");
    static std::string delta_domain, delta_out;
    static GridOpts delta_grid;
    static long delta_quads = 2000;
    static std::uint64_t delta_seed = 1;
    static double delta_max = kInf;
    delta_cmd->add_option("--domain", delta_domain, "Domain spec JSON file")->required();
    delta_cmd->add_option("--quadruples", delta_quads, "Sampled node quadruples")
        ->check(CLI::PositiveNumber);
    delta_cmd->add_option("--seed", delta_seed, "Sampling seed");
    delta_cmd->add_option("--max", delta_max, "Fail when delta_hat exceeds this");
    add_grid_opts(delta_cmd, delta_grid);
    delta_cmd->add_option("--out", delta_out, "Write output here instead of stdout");
    delta_cmd->callback([&] {
        exit_code =
            run_delta(delta_domain, delta_grid, delta_quads, delta_seed, delta_max, delta_out);
    });

    // visual
    auto* vis_cmd = add_subcommand(&app, "visual", "Visual metametric table between anchors");
    static std::string vis_domain, vis_out;
    static GridOpts vis_grid;
    static double vis_tau = 0.2;
    static int vis_anchors = 32, vis_approach = 6;
    static std::uint64_t vis_seed = 1;
    vis_cmd->add_option("--domain", vis_domain, "Domain spec JSON file")->required();
    vis_cmd->add_option("--tau", vis_tau, "Visual parameter")->check(CLI::PositiveNumber);
    vis_cmd->add_option("--anchors", vis_anchors, "Boundary anchor count")
        ->check(CLI::PositiveNumber);
    vis_cmd->add_option("--seed", vis_seed, "Anchor sampling seed");
    vis_cmd->add_option("--approach-depth", vis_approach, "Dyadic anchor approach depth")
        ->check(CLI::PositiveNumber);
    add_grid_opts(vis_cmd, vis_grid);
    vis_cmd->add_option("--out", vis_out, "Write output here instead of stdout");
    vis_cmd->callback([&] {
        exit_code =
            run_visual(vis_domain, vis_grid, vis_tau, vis_anchors, vis_seed, vis_approach, vis_out);
    });

    // qs-check
    auto* qs_cmd = add_subcommand(&app, "qs-check", "Quasisymmetry envelope of a sampled map");
    static std::string qs_src, qs_dst, qs_map, qs_out;
    static GridOpts qs_grid;
    static int qs_triples = 1500, qs_bins = 60;
    static std::uint64_t qs_seed = 1;
    static double qs_max = 200.0;
    qs_cmd->add_option("--src-domain", qs_src, "Source domain spec JSON file")->required();
    qs_cmd->add_option("--dst-domain", qs_dst, "Destination domain spec JSON file")->required();
    qs_cmd->add_option("--map", qs_map, "Sampled map JSON file")->required();
    qs_cmd->add_option("--triples", qs_triples, "Sampled triples")->check(CLI::PositiveNumber);
    qs_cmd->add_option("--seed", qs_seed, "Sampling seed");
    qs_cmd->add_option("--bins", qs_bins, "Envelope bins")->check(CLI::PositiveNumber);
    qs_cmd->add_option("--max-envelope", qs_max, "Fail when the worst ratio exceeds this");
    add_grid_opts(qs_cmd, qs_grid);
    qs_cmd->add_option("--out", qs_out, "Write output here instead of stdout");
    qs_cmd->callback([&] {
        exit_code = run_qs_check(qs_src, qs_dst, qs_map, qs_grid, qs_triples, qs_seed, qs_bins,
                                 qs_max, qs_out);
    });

    // shared verdict threshold flags
    static VerdictThresholds th;
    auto add_threshold_opts = [](CLI::App* cmd, VerdictThresholds& t) {
        cmd->add_option("--max-delta", t.max_delta, "Hyperbolicity residual cap");
        cmd->add_option("--max-uniformity", t.max_uniformity, "Uniform-mode M_hat cap");
        cmd->add_option("--max-quasihyperbolicity", t.max_quasihyperbolicity,
                        "Metric comparison cap");
        cmd->add_option("--max-envelope", t.max_envelope, "Envelope ratio cap");
        cmd->add_option("--pairs", t.pairs, "Sampled pairs")->check(CLI::PositiveNumber);
        cmd->add_option("--quadruples", t.quadruples, "Sampled quadruples")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--triples", t.triples, "Sampled triples")->check(CLI::PositiveNumber);
        cmd->add_option("--bins", t.bins, "Envelope bins")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", t.seed, "Sampling seed");
    };

    // property-a
    auto* pa_cmd = add_subcommand(&app, "property-a", "Hyperbolicity and visual boundary verdict");
    static std::string pa_domain, pa_out;
    static GridOpts pa_grid;
    static double pa_tau = 0.2;
    static int pa_anchors = 32;
    pa_cmd->add_option("--domain", pa_domain, "Domain spec JSON file")->required();
    pa_cmd->add_option("--tau", pa_tau, "Visual parameter")->check(CLI::PositiveNumber);
    pa_cmd->add_option("--anchors", pa_anchors, "Boundary anchor count")
        ->check(CLI::PositiveNumber);
    add_threshold_opts(pa_cmd, th);
    add_grid_opts(pa_cmd, pa_grid);
    pa_cmd->add_option("--out", pa_out, "Write output here instead of stdout");
    pa_cmd->callback(
        [&] { exit_code = run_property_a(pa_domain, pa_grid, pa_tau, pa_anchors, th, pa_out); });

    // property-b
    auto* pb_cmd = add_subcommand(&app, "property-b", "Uniformity and boundary map verdict");
    static std::string pb_src, pb_dst, pb_map, pb_out;
    static GridOpts pb_grid;
    pb_cmd->add_option("--src-domain", pb_src, "Source domain spec JSON file")->required();
    pb_cmd->add_option("--dst-domain", pb_dst, "Destination domain spec JSON file")->required();
    pb_cmd->add_option("--map", pb_map, "Sampled map JSON file")->required();
    add_threshold_opts(pb_cmd, th);
    add_grid_opts(pb_cmd, pb_grid);
    pb_cmd->add_option("--out", pb_out, "Write output here instead of stdout");
    pb_cmd->callback(
        [&] { exit_code = run_property_b(pb_src, pb_dst, pb_map, pb_grid, th, pb_out); });

    // constants
    auto* const_cmd = add_subcommand(&app, "constants", "Constant ledger in extended-log form");
    static double const_M = 36.0, const_C = 37.0;
    static std::string const_eta = "pow:1:1", const_out;
    const_cmd->add_option("--M", const_M, "Turning/cigar input constant")->required();
    const_cmd->add_option("--C", const_C, "Comparison input constant")->required();
    const_cmd->add_option("--eta", const_eta, "Distortion gauge, pow:a:b or affine:a[:c]");
    const_cmd->add_option("--out", const_out, "Write output here instead of stdout");
    const_cmd->callback(
        [&] { exit_code = run_constants(const_M, const_C, const_eta, const_out); });

    // inequalities
    auto* ineq_cmd = add_subcommand(&app, "inequalities", "Batch distance inequality checks");
    static std::string ineq_domain, ineq_out;
    static GridOpts ineq_grid;
    static int ineq_pairs = 500;
    static std::uint64_t ineq_seed = 1;
    static double ineq_tol = 0.1;
    ineq_cmd->add_option("--domain", ineq_domain, "Domain spec JSON file")->required();
    ineq_cmd->add_option("--pairs", ineq_pairs, "Sampled point pairs")->check(CLI::PositiveNumber);
    ineq_cmd->add_option("--seed", ineq_seed, "Sampling seed");
    ineq_cmd->add_option("--tol", ineq_tol, "Slack allowed on the upper bounds")
        ->check(CLI::NonNegativeNumber);
    add_grid_opts(ineq_cmd, ineq_grid);
    ineq_cmd->add_option("--out", ineq_out, "Write output here instead of stdout");
    ineq_cmd->callback([&] {
        exit_code =
            run_inequalities(ineq_domain, ineq_grid, ineq_pairs, ineq_seed, ineq_tol, ineq_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
