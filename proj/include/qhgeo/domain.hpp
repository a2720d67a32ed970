#pragma once

#include "qhgeo/errors.hpp"
#include "qhgeo/geometry.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qhgeo {

struct DiskSpec {
    Vec2 center;
    double radius = 0.0;
};

struct RectangleSpec {
    Vec2 min_corner;
    Vec2 max_corner;
};

struct AnnulusSpec {
    Vec2 center;
    double r_inner = 0.0;
    double r_outer = 0.0;
};

/// The unit square minus teeth pairs L_n = {x = 2^-n, 0 < y <= 2/3} and
/// K_n = {x = 2^-n + 2^-(n+2), 1/3 <= y < 1}, n = 1..teeth.
struct CombSpec {
    int teeth = 1;
};

struct SlitPolygonSpec {
    std::vector<Vec2> outer;      // simple polygon, stored counterclockwise
    std::vector<Segment> slits;   // closed segments removed from the open region
};

/// One connected piece of the topological boundary, used for arclength-uniform
/// sampling. Slits count their arclength twice (two accessible sides).
struct BoundaryComponent {
    enum class Kind { Circle, Loop, Slit };
    Kind kind = Kind::Loop;
    Vec2 center;                  // Circle
    double radius = 0.0;          // Circle
    std::vector<Vec2> loop;       // Loop (closed, implicit last->first edge)
    Segment slit;                 // Slit
    double arclength = 0.0;       // sampling weight
    std::string name;

    Vec2 point_at_fraction(double u) const;
};

/// Validated, immutable description of a bounded open subdomain of the plane.
class DomainSpec {
public:
    using Variant = std::variant<DiskSpec, RectangleSpec, AnnulusSpec, CombSpec, SlitPolygonSpec>;

    static DomainSpec disk(const Vec2& center, double radius);
    static DomainSpec rectangle(const Vec2& min_corner, const Vec2& max_corner);
    static DomainSpec annulus(const Vec2& center, double r_inner, double r_outer);
    static DomainSpec comb(int teeth);
    static DomainSpec slit_polygon(std::vector<Vec2> outer, std::vector<Segment> slits);

    static DomainSpec from_json_text(const std::string& text);
    std::string to_json_text() const;

    const Variant& kind() const { return kind_; }
    std::string kind_name() const;

    bool contains(const Vec2& p) const;

    /// Euclidean distance from an interior point to the topological boundary
    /// (outer boundary and all slits). Throws point-outside-domain otherwise.
    double boundary_distance(const Vec2& p) const;

    /// Unsigned distance from any point to the boundary set; agrees with
    /// boundary_distance on interior points and never throws.
    double boundary_set_distance(const Vec2& p) const;

    /// Seeded, approximately arclength-uniform sample over all boundary
    /// components; every component receives at least one point when count
    /// allows. count >= 2.
    std::vector<Vec2> boundary_sample(int count, std::uint64_t seed) const;

    /// Candidate unit normals pointing into the domain at a boundary point,
    /// most plausible first. Slit points get both sides; slit tips also get
    /// the axial escape direction.
    std::vector<Vec2> inward_normals(const Vec2& boundary_point) const;

    std::pair<Vec2, Vec2> bounding_box() const;

    const std::vector<Segment>& slits() const { return slits_; }
    const std::vector<BoundaryComponent>& boundary_components() const { return components_; }

    /// True when the open segment between two interior points is guaranteed to
    /// stay inside the domain.
    bool segment_inside(const Vec2& a, const Vec2& b) const;

private:
    explicit DomainSpec(Variant kind);

    Variant kind_;
    std::vector<Segment> slits_;
    std::vector<BoundaryComponent> components_;
};

// Spec-level operations.
inline bool contains(const DomainSpec& spec, const Vec2& p) { return spec.contains(p); }
inline double boundary_distance(const DomainSpec& spec, const Vec2& p) { return spec.boundary_distance(p); }
inline std::vector<Vec2> boundary_sample(const DomainSpec& spec, int count, std::uint64_t seed) {
    return spec.boundary_sample(count, seed);
}

}  // namespace qhgeo
