#include "qhgeo/domain.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace qhgeo {

namespace {

constexpr double kCombLow = 1.0 / 3.0;
constexpr double kCombHigh = 2.0 / 3.0;

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw Error(ErrorCode::MalformedSpec, "field '" + field + "': " + message);
}

void require_finite(const Vec2& p, const std::string& field) {
    require(std::isfinite(p.x()) && std::isfinite(p.y()), field, "coordinates must be finite");
}

double signed_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        s += cross2(a, b);
    }
    return 0.5 * s;
}

std::vector<Segment> comb_slits(int teeth) {
    std::vector<Segment> slits;
    slits.reserve(2 * static_cast<std::size_t>(teeth));
    for (int n = 1; n <= teeth; ++n) {
        const double lx = std::ldexp(1.0, -n);
        const double kx = lx + std::ldexp(1.0, -(n + 2));
        slits.push_back(Segment{Vec2(lx, 0.0), Vec2(lx, kCombHigh)});
        slits.push_back(Segment{Vec2(kx, kCombLow), Vec2(kx, 1.0)});
    }
    return slits;
}

std::vector<Vec2> rectangle_loop(const Vec2& lo, const Vec2& hi) {
    return {Vec2(lo.x(), lo.y()), Vec2(hi.x(), lo.y()), Vec2(hi.x(), hi.y()), Vec2(lo.x(), hi.y())};
}

BoundaryComponent circle_component(const Vec2& center, double radius, std::string name) {
    BoundaryComponent c;
    c.kind = BoundaryComponent::Kind::Circle;
    c.center = center;
    c.radius = radius;
    c.arclength = 2.0 * std::numbers::pi * radius;
    c.name = std::move(name);
    return c;
}

BoundaryComponent loop_component(std::vector<Vec2> loop, std::string name) {
    BoundaryComponent c;
    c.kind = BoundaryComponent::Kind::Loop;
    c.arclength = polygon_perimeter(loop);
    c.loop = std::move(loop);
    c.name = std::move(name);
    return c;
}

BoundaryComponent slit_component(const Segment& s, std::string name) {
    BoundaryComponent c;
    c.kind = BoundaryComponent::Kind::Slit;
    c.slit = s;
    c.arclength = 2.0 * s.length();  // two accessible sides
    c.name = std::move(name);
    return c;
}

Vec2 parse_vec2(const nlohmann::json& j, const std::string& field) {
    require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), field,
            "expected [x, y]");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

Vec2 BoundaryComponent::point_at_fraction(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    switch (kind) {
        case Kind::Circle: {
            const double theta = 2.0 * std::numbers::pi * u;
            return center + radius * Vec2(std::cos(theta), std::sin(theta));
        }
        case Kind::Slit:
            return slit.point_at(u);
        case Kind::Loop: {
            double target = u * polygon_perimeter(loop);
            for (std::size_t i = 0; i < loop.size(); ++i) {
                const Segment edge{loop[i], loop[(i + 1) % loop.size()]};
                const double len = edge.length();
                if (target <= len || i + 1 == loop.size()) {
                    return edge.point_at(len > 0.0 ? std::min(target / len, 1.0) : 0.0);
                }
                target -= len;
            }
            return loop.front();
        }
    }
    return center;
}

DomainSpec::DomainSpec(Variant kind) : kind_(std::move(kind)) {
    if (const auto* d = std::get_if<DiskSpec>(&kind_)) {
        require_finite(d->center, "center");
        require(std::isfinite(d->radius) && d->radius > 0.0, "radius", "must be strictly positive");
        components_.push_back(circle_component(d->center, d->radius, "circle"));
    } else if (const auto* r = std::get_if<RectangleSpec>(&kind_)) {
        require_finite(r->min_corner, "min_corner");
        require_finite(r->max_corner, "max_corner");
        require(r->min_corner.x() < r->max_corner.x() && r->min_corner.y() < r->max_corner.y(),
                "min_corner", "corners must be strictly ordered in every coordinate");
        components_.push_back(loop_component(rectangle_loop(r->min_corner, r->max_corner), "outer"));
    } else if (const auto* a = std::get_if<AnnulusSpec>(&kind_)) {
        require_finite(a->center, "center");
        require(std::isfinite(a->r_inner) && a->r_inner > 0.0, "r_inner", "must be strictly positive");
        require(std::isfinite(a->r_outer) && a->r_outer > a->r_inner, "r_outer",
                "must exceed r_inner");
        components_.push_back(circle_component(a->center, a->r_outer, "outer"));
        components_.push_back(circle_component(a->center, a->r_inner, "inner"));
    } else if (const auto* c = std::get_if<CombSpec>(&kind_)) {
        require(c->teeth >= 1, "teeth", "must be a positive integer");
        slits_ = comb_slits(c->teeth);
        components_.push_back(loop_component(rectangle_loop(Vec2(0, 0), Vec2(1, 1)), "square"));
        for (int n = 1; n <= c->teeth; ++n) {
            components_.push_back(slit_component(slits_[2 * (n - 1)], "L" + std::to_string(n)));
            components_.push_back(slit_component(slits_[2 * (n - 1) + 1], "K" + std::to_string(n)));
        }
    } else if (auto* sp = std::get_if<SlitPolygonSpec>(&kind_)) {
        require(sp->outer.size() >= 3, "outer", "polygon needs at least 3 vertices");
        for (const Vec2& v : sp->outer) require_finite(v, "outer");
        require(std::abs(signed_area(sp->outer)) > 0.0, "outer", "polygon must have positive area");
        if (signed_area(sp->outer) < 0.0) std::reverse(sp->outer.begin(), sp->outer.end());
        for (std::size_t i = 0; i < sp->slits.size(); ++i) {
            const std::string field = "slits[" + std::to_string(i) + "]";
            require_finite(sp->slits[i].a, field);
            require_finite(sp->slits[i].b, field);
            require(sp->slits[i].length() > 0.0, field, "slit must have positive length");
        }
        slits_ = sp->slits;
        components_.push_back(loop_component(sp->outer, "outer"));
        for (std::size_t i = 0; i < slits_.size(); ++i) {
            components_.push_back(slit_component(slits_[i], "slit" + std::to_string(i)));
        }
    }
}

DomainSpec DomainSpec::disk(const Vec2& center, double radius) {
    return DomainSpec(DiskSpec{center, radius});
}

DomainSpec DomainSpec::rectangle(const Vec2& min_corner, const Vec2& max_corner) {
    return DomainSpec(RectangleSpec{min_corner, max_corner});
}

DomainSpec DomainSpec::annulus(const Vec2& center, double r_inner, double r_outer) {
    return DomainSpec(AnnulusSpec{center, r_inner, r_outer});
}

DomainSpec DomainSpec::comb(int teeth) { return DomainSpec(CombSpec{teeth}); }

DomainSpec DomainSpec::slit_polygon(std::vector<Vec2> outer, std::vector<Segment> slits) {
    return DomainSpec(SlitPolygonSpec{std::move(outer), std::move(slits)});
}

std::string DomainSpec::kind_name() const {
    if (std::holds_alternative<DiskSpec>(kind_)) return "disk";
    if (std::holds_alternative<RectangleSpec>(kind_)) return "rectangle";
    if (std::holds_alternative<AnnulusSpec>(kind_)) return "annulus";
    if (std::holds_alternative<CombSpec>(kind_)) return "comb";
    return "slit_polygon";
}

bool DomainSpec::contains(const Vec2& p) const {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return false;
    if (const auto* d = std::get_if<DiskSpec>(&kind_)) {
        return (p - d->center).norm() < d->radius;
    }
    if (const auto* r = std::get_if<RectangleSpec>(&kind_)) {
        return p.x() > r->min_corner.x() && p.x() < r->max_corner.x() &&
               p.y() > r->min_corner.y() && p.y() < r->max_corner.y();
    }
    if (const auto* a = std::get_if<AnnulusSpec>(&kind_)) {
        const double d = (p - a->center).norm();
        return d > a->r_inner && d < a->r_outer;
    }
    if (std::holds_alternative<CombSpec>(kind_)) {
        if (!(p.x() > 0.0 && p.x() < 1.0 && p.y() > 0.0 && p.y() < 1.0)) return false;
        for (const Segment& s : slits_) {
            if (p.x() == s.a.x() && p.y() >= s.a.y() && p.y() <= s.b.y()) return false;
        }
        return true;
    }
    const auto* sp = std::get_if<SlitPolygonSpec>(&kind_);
    if (!point_in_polygon(p, sp->outer)) return false;
    for (const Segment& s : slits_) {
        if (point_on_segment(p, s)) return false;
    }
    return true;
}

double DomainSpec::boundary_distance(const Vec2& p) const {
    if (!contains(p)) {
        std::ostringstream os;
        os << "(" << p.x() << ", " << p.y() << ") is not an interior point of " << kind_name();
        throw Error(ErrorCode::PointOutsideDomain, os.str());
    }
    return boundary_set_distance(p);
}

double DomainSpec::boundary_set_distance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const BoundaryComponent& c : components_) {
        switch (c.kind) {
            case BoundaryComponent::Kind::Circle:
                best = std::min(best, std::abs((p - c.center).norm() - c.radius));
                break;
            case BoundaryComponent::Kind::Slit:
                best = std::min(best, point_segment_distance(p, c.slit));
                break;
            case BoundaryComponent::Kind::Loop:
                for (std::size_t i = 0; i < c.loop.size(); ++i) {
                    const Segment edge{c.loop[i], c.loop[(i + 1) % c.loop.size()]};
                    best = std::min(best, point_segment_distance(p, edge));
                }
                break;
        }
    }
    return best;
}

std::vector<Vec2> DomainSpec::boundary_sample(int count, std::uint64_t seed) const {
    if (count < 2) throw Error(ErrorCode::PreconditionViolation, "boundary_sample needs count >= 2");

    double total = 0.0;
    for (const BoundaryComponent& c : components_) total += c.arclength;

    // Largest-remainder allocation, at least one point per component while the
    // budget lasts (components in declaration order).
    const std::size_t m = components_.size();
    std::vector<int> alloc(m, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double share = count * components_[i].arclength / total;
        alloc[i] = static_cast<int>(std::floor(share));
        assigned += alloc[i];
        remainders.emplace_back(share - std::floor(share), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < count && k < remainders.size(); ++k, ++assigned) {
        ++alloc[remainders[k].second];
    }
    for (std::size_t i = 0; i < m && assigned < count; ++i) {
        ++alloc[i];
        ++assigned;
    }
    // Ensure nonempty components when the budget allows: steal from the largest.
    for (std::size_t i = 0; i < m; ++i) {
        if (alloc[i] == 0) {
            std::size_t donor = std::distance(alloc.begin(), std::max_element(alloc.begin(), alloc.end()));
            if (alloc[donor] > 1) {
                --alloc[donor];
                ++alloc[i];
            }
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < m; ++i) {
        const int n = alloc[i];
        for (int k = 0; k < n; ++k) {
            const double u = (k + unit(rng)) / n;  // stratified along the component
            out.push_back(components_[i].point_at_fraction(u));
        }
    }
    return out;
}

std::vector<Vec2> DomainSpec::inward_normals(const Vec2& b) const {
    constexpr double kOnTol = 1e-9;
    std::vector<Vec2> normals;

    auto add = [&normals](const Vec2& n) {
        if (n.norm() > 0.0) normals.push_back(n.normalized());
    };

    if (const auto* d = std::get_if<DiskSpec>(&kind_)) {
        add(d->center - b);
        return normals;
    }
    if (const auto* a = std::get_if<AnnulusSpec>(&kind_)) {
        const double r = (b - a->center).norm();
        if (std::abs(r - a->r_outer) < std::abs(r - a->r_inner)) {
            add(a->center - b);  // outer circle: inward
        } else {
            add(b - a->center);  // inner circle: away from the hole
        }
        return normals;
    }

    // Slit sides first: both perpendiculars; at a tip also the axial escape.
    for (const Segment& s : slits_) {
        if (point_segment_distance(b, s) < kOnTol) {
            const Vec2 dir = s.direction();
            add(Vec2(-dir.y(), dir.x()));
            add(Vec2(dir.y(), -dir.x()));
            if ((b - s.a).norm() < kOnTol) add(-dir);
            if ((b - s.b).norm() < kOnTol) add(dir);
            return normals;
        }
    }

    std::vector<Vec2> loop;
    if (const auto* r = std::get_if<RectangleSpec>(&kind_)) {
        loop = rectangle_loop(r->min_corner, r->max_corner);
    } else if (std::holds_alternative<CombSpec>(kind_)) {
        loop = rectangle_loop(Vec2(0, 0), Vec2(1, 1));
    } else if (const auto* sp = std::get_if<SlitPolygonSpec>(&kind_)) {
        loop = sp->outer;
    }
    // Loops are counterclockwise, so the left normal of each edge points inward.
    Vec2 corner_sum(0, 0);
    int hits = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Segment edge{loop[i], loop[(i + 1) % loop.size()]};
        if (point_segment_distance(b, edge) < kOnTol) {
            const Vec2 dir = edge.direction();
            const Vec2 n(-dir.y(), dir.x());
            corner_sum += n;
            ++hits;
        }
    }
    if (hits > 1) add(corner_sum);  // corner: bisector first
    if (hits >= 1) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Segment edge{loop[i], loop[(i + 1) % loop.size()]};
            if (point_segment_distance(b, edge) < kOnTol) {
                const Vec2 dir = edge.direction();
                add(Vec2(-dir.y(), dir.x()));
            }
        }
    }
    return normals;
}

std::pair<Vec2, Vec2> DomainSpec::bounding_box() const {
    if (const auto* d = std::get_if<DiskSpec>(&kind_)) {
        return {d->center - Vec2(d->radius, d->radius), d->center + Vec2(d->radius, d->radius)};
    }
    if (const auto* r = std::get_if<RectangleSpec>(&kind_)) {
        return {r->min_corner, r->max_corner};
    }
    if (const auto* a = std::get_if<AnnulusSpec>(&kind_)) {
        return {a->center - Vec2(a->r_outer, a->r_outer), a->center + Vec2(a->r_outer, a->r_outer)};
    }
    if (std::holds_alternative<CombSpec>(kind_)) {
        return {Vec2(0, 0), Vec2(1, 1)};
    }
    const auto* sp = std::get_if<SlitPolygonSpec>(&kind_);
    Vec2 lo = sp->outer.front();
    Vec2 hi = sp->outer.front();
    for (const Vec2& v : sp->outer) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return {lo, hi};
}

bool DomainSpec::segment_inside(const Vec2& a, const Vec2& b) const {
    const Segment seg{a, b};
    if (const auto* an = std::get_if<AnnulusSpec>(&kind_)) {
        // Both endpoints are inside the outer circle (convex); the segment must
        // additionally clear the inner hole.
        return point_segment_distance(an->center, seg) > an->r_inner;
    }
    if (const auto* sp = std::get_if<SlitPolygonSpec>(&kind_)) {
        for (std::size_t i = 0; i < sp->outer.size(); ++i) {
            const Segment edge{sp->outer[i], sp->outer[(i + 1) % sp->outer.size()]};
            if (segments_intersect(seg, edge)) return false;
        }
    }
    for (const Segment& s : slits_) {
        if (segments_intersect(seg, s)) return false;
    }
    return true;  // disk/rectangle outer boundaries are convex
}

DomainSpec DomainSpec::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedSpec, std::string("invalid JSON: ") + e.what());
    }
    require(j.is_object(), "kind", "domain spec must be a JSON object");
    require(j.contains("kind") && j["kind"].is_string(), "kind", "missing variant selector");
    const std::string kind = j["kind"].get<std::string>();

    auto number = [&j](const std::string& field) {
        require(j.contains(field) && j[field].is_number(), field, "expected a number");
        return j[field].get<double>();
    };

    if (kind == "disk") {
        require(j.contains("center"), "center", "required");
        return disk(parse_vec2(j["center"], "center"), number("radius"));
    }
    if (kind == "rectangle") {
        require(j.contains("min_corner"), "min_corner", "required");
        require(j.contains("max_corner"), "max_corner", "required");
        return rectangle(parse_vec2(j["min_corner"], "min_corner"),
                         parse_vec2(j["max_corner"], "max_corner"));
    }
    if (kind == "annulus") {
        require(j.contains("center"), "center", "required");
        return annulus(parse_vec2(j["center"], "center"), number("r_inner"), number("r_outer"));
    }
    if (kind == "comb") {
        require(j.contains("teeth") && j["teeth"].is_number_integer(), "teeth",
                "expected a positive integer");
        return comb(j["teeth"].get<int>());
    }
    if (kind == "slit_polygon") {
        require(j.contains("outer") && j["outer"].is_array(), "outer", "expected vertex array");
        std::vector<Vec2> outer;
        for (std::size_t i = 0; i < j["outer"].size(); ++i) {
            outer.push_back(parse_vec2(j["outer"][i], "outer[" + std::to_string(i) + "]"));
        }
        std::vector<Segment> slits;
        if (j.contains("slits")) {
            require(j["slits"].is_array(), "slits", "expected segment array");
            for (std::size_t i = 0; i < j["slits"].size(); ++i) {
                const auto& js = j["slits"][i];
                const std::string field = "slits[" + std::to_string(i) + "]";
                require(js.is_array() && js.size() == 2, field, "expected [[ax,ay],[bx,by]]");
                slits.push_back(Segment{parse_vec2(js[0], field), parse_vec2(js[1], field)});
            }
        }
        return slit_polygon(std::move(outer), std::move(slits));
    }
    throw Error(ErrorCode::MalformedSpec, "field 'kind': unknown variant '" + kind + "'");
}

std::string DomainSpec::to_json_text() const {
    nlohmann::ordered_json j;
    j["kind"] = kind_name();
    if (const auto* d = std::get_if<DiskSpec>(&kind_)) {
        j["center"] = {d->center.x(), d->center.y()};
        j["radius"] = d->radius;
    } else if (const auto* r = std::get_if<RectangleSpec>(&kind_)) {
        j["min_corner"] = {r->min_corner.x(), r->min_corner.y()};
        j["max_corner"] = {r->max_corner.x(), r->max_corner.y()};
    } else if (const auto* a = std::get_if<AnnulusSpec>(&kind_)) {
        j["center"] = {a->center.x(), a->center.y()};
        j["r_inner"] = a->r_inner;
        j["r_outer"] = a->r_outer;
    } else if (const auto* c = std::get_if<CombSpec>(&kind_)) {
        j["teeth"] = c->teeth;
    } else if (const auto* sp = std::get_if<SlitPolygonSpec>(&kind_)) {
        for (const Vec2& v : sp->outer) j["outer"].push_back({v.x(), v.y()});
        j["slits"] = nlohmann::ordered_json::array();
        for (const Segment& s : sp->slits) {
            j["slits"].push_back({{s.a.x(), s.a.y()}, {s.b.x(), s.b.y()}});
        }
    }
    return j.dump(2);
}

}  // namespace qhgeo
