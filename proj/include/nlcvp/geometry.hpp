#pragma once

// Domains, interior shrinkages, complement collars and one-dimensional meshes.

#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nlcvp/kernels.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

struct Interval {
    double a = 0.0;
    double b = 1.0;
};

struct Disc {
    Point center = Point::Zero();
    double radius = 1.0;
};

struct Polygon {
    std::vector<Point> vertices;  // counter-clockwise after validation
};

struct DomainSpec {
    std::variant<Interval, Disc, Polygon> shape;

    static DomainSpec interval(double a, double b);
    static DomainSpec disc(Point center, double radius);
    /// Convex simple polygon; vertices may be given in either orientation.
    static DomainSpec polygon(std::vector<Point> vertices);

    int dimension() const;
    double measure() const;
    double diameter() const;
    double inradius() const;
    bool contains(const Point& x) const;  // open set
    /// dist(x, boundary) for any x.
    double boundary_distance(const Point& x) const;

    nlohmann::json to_json() const;
    static DomainSpec from_json(const nlohmann::json& j);
};

/// A region described by the signed distance to the boundary of a domain:
/// inside points with dist > `inner` (shrinkage) or outside points with
/// dist < `outer` (collar).
struct Region {
    enum class Kind { shrinkage, collar };
    Kind kind = Kind::shrinkage;
    DomainSpec base;
    double delta = 0.0;
    bool empty = false;
    bool flagged = false;              // empty shrinkage requested
    std::optional<DomainSpec> shape;   // exact shape when available (shrinkage)
    std::vector<Interval> pieces;      // one-dimensional description

    bool contains(const Point& x) const;
};

/// Omega_delta = {x in Omega : dist(x, boundary) > delta}.
Region shrink(const DomainSpec& dom, double delta);
/// Omega(delta) = {x outside closure(Omega) : dist(x, boundary) < delta}.
Region collar(const DomainSpec& dom, double delta);

bool ball_inside(const DomainSpec& dom, const Ball& ball);

/// inf over boundary points a of int_{Omega_delta} nu(h - a) dh.
double shrunk_kernel_mass(const KernelSpec& k, const DomainSpec& dom, double delta);

enum class Tag { interior, collar };

struct Element {
    std::array<int, 2> nodes{};
    double left = 0.0;
    double right = 0.0;
    Tag tag = Tag::interior;

    double size() const { return right - left; }
    double mid() const { return 0.5 * (left + right); }
};

struct MeshOptions {
    double grading_ratio = 0.7;
    double min_size_factor = 1.0 / 32.0;
    double collar_max_size = std::numeric_limits<double>::infinity();
};

struct DomainMesh {
    DomainSpec domain;
    std::vector<double> vertices;          // sorted ascending
    std::vector<Element> elements;         // sorted by position
    std::vector<double> boundary_distance; // per vertex
    double h = 0.0;
    double r_trunc = 0.0;                  // outer radius of the collar
    bool far_field = false;
    double collar_lo = 0.0;                // collar = (collar_lo, a) U (b, collar_hi)
    double collar_hi = 0.0;

    double a() const;
    double b() const;
    std::size_t num_vertices() const { return vertices.size(); }
    std::vector<int> interior_elements() const;
    std::vector<int> collar_elements() const;

    nlohmann::json to_json() const;
};

/// Uniform interior mesh of size <= h with a geometrically graded collar.
/// Full-support kernels get the collar B_R \ closure(Omega) and a far-field
/// DOF; compact kernels get exactly Omega(horizon) and no far field.
DomainMesh build_mesh(const DomainSpec& dom, const KernelSpec& k, double h, double r_trunc,
                      const MeshOptions& opts = {});

}  // namespace nlcvp
