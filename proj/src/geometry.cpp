#include "nlcvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlcvp/error.hpp"
#include "nlcvp/integrate.hpp"

namespace nlcvp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double cross(const Point& a, const Point& b) { return a[0] * b[1] - a[1] * b[0]; }

double signed_area(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

double segment_distance(const Point& x, const Point& p, const Point& q) {
    const Point e = q - p;
    const double t = std::clamp((x - p).dot(e) / e.squaredNorm(), 0.0, 1.0);
    return (x - (p + t * e)).norm();
}

// Keeps the part of a convex polygon on the left of the directed line p->q
// shifted left by `offset`.
std::vector<Point> clip_left(const std::vector<Point>& poly, const Point& p, const Point& q,
                             double offset) {
    const Point e = (q - p).normalized();
    const Point n(-e[1], e[0]);
    const Point p0 = p + offset * n;
    auto side = [&](const Point& x) { return (x - p0).dot(n); };
    std::vector<Point> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % poly.size()];
        const double sa = side(a);
        const double sb = side(b);
        if (sa >= 0.0) out.push_back(a);
        if ((sa >= 0.0) != (sb >= 0.0)) out.push_back(a + (b - a) * (sa / (sa - sb)));
    }
    return out;
}

// Parameter interval of the ray a + t*dir inside a convex polygon.
std::pair<double, double> ray_span(const std::vector<Point>& poly, const Point& a, const Point& dir) {
    double lo = 0.0;
    double hi = inf;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        const Point e = q - p;
        const Point n(-e[1], e[0]);  // inward for counter-clockwise order
        const double num = (a - p).dot(n);
        const double den = dir.dot(n);
        if (std::abs(den) < 1e-300) {
            if (num < 0.0) return {0.0, 0.0};
            continue;
        }
        const double t = -num / den;
        if (den > 0.0) lo = std::max(lo, t);
        else hi = std::min(hi, t);
    }
    if (hi < lo) return {0.0, 0.0};
    return {lo, hi};
}

}  // namespace

DomainSpec DomainSpec::interval(double a, double b) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorCode::invalid_domain, "interval needs a < b");
    return DomainSpec{Interval{a, b}};
}

DomainSpec DomainSpec::disc(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw Error(ErrorCode::invalid_domain, "disc radius must be positive");
    return DomainSpec{Disc{center, radius}};
}

DomainSpec DomainSpec::polygon(std::vector<Point> v) {
    if (v.size() < 3) throw Error(ErrorCode::invalid_domain, "polygon needs at least 3 vertices");
    double area = signed_area(v);
    if (area < 0.0) {
        std::reverse(v.begin(), v.end());
        area = -area;
    }
    double scale = 0.0;
    for (const auto& p : v) scale = std::max(scale, p.norm());
    if (!(area > 1e-12 * std::max(scale * scale, 1e-300)))
        throw Error(ErrorCode::invalid_domain, "degenerate polygon (zero area)");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % v.size()];
        const Point& c = v[(i + 2) % v.size()];
        if ((b - a).norm() == 0.0) throw Error(ErrorCode::invalid_domain, "repeated polygon vertex");
        if (cross(b - a, c - b) <= 0.0)
            throw Error(ErrorCode::invalid_domain, "polygon must be convex with no collinear vertices");
    }
    return DomainSpec{Polygon{std::move(v)}};
}

int DomainSpec::dimension() const { return std::holds_alternative<Interval>(shape) ? 1 : 2; }

double DomainSpec::measure() const {
    if (auto* i = std::get_if<Interval>(&shape)) return i->b - i->a;
    if (auto* d = std::get_if<Disc>(&shape)) return std::numbers::pi * d->radius * d->radius;
    return signed_area(std::get<Polygon>(shape).vertices);
}

double DomainSpec::diameter() const {
    if (auto* i = std::get_if<Interval>(&shape)) return i->b - i->a;
    if (auto* d = std::get_if<Disc>(&shape)) return 2.0 * d->radius;
    const auto& v = std::get<Polygon>(shape).vertices;
    double best = 0.0;
    for (const auto& p : v)
        for (const auto& q : v) best = std::max(best, (p - q).norm());
    return best;
}

double DomainSpec::inradius() const {
    if (auto* i = std::get_if<Interval>(&shape)) return 0.5 * (i->b - i->a);
    if (auto* d = std::get_if<Disc>(&shape)) return d->radius;
    // Largest inscribed radius by bisection on the emptiness of the offset.
    const auto& v = std::get<Polygon>(shape).vertices;
    double lo = 0.0;
    double hi = diameter();
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        std::vector<Point> p = v;
        for (std::size_t i = 0; i < v.size() && !p.empty(); ++i)
            p = clip_left(p, v[i], v[(i + 1) % v.size()], mid);
        if (p.size() >= 3 && std::abs(signed_area(p)) > 0.0) lo = mid;
        else hi = mid;
    }
    return lo;
}

bool DomainSpec::contains(const Point& x) const {
    if (auto* i = std::get_if<Interval>(&shape)) return x[0] > i->a && x[0] < i->b;
    if (auto* d = std::get_if<Disc>(&shape)) return (x - d->center).norm() < d->radius;
    const auto& v = std::get<Polygon>(shape).vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (cross(v[(i + 1) % v.size()] - v[i], x - v[i]) <= 0.0) return false;
    }
    return true;
}

double DomainSpec::boundary_distance(const Point& x) const {
    if (auto* i = std::get_if<Interval>(&shape))
        return std::min(std::abs(x[0] - i->a), std::abs(x[0] - i->b));
    if (auto* d = std::get_if<Disc>(&shape)) return std::abs((x - d->center).norm() - d->radius);
    const auto& v = std::get<Polygon>(shape).vertices;
    double best = inf;
    for (std::size_t i = 0; i < v.size(); ++i)
        best = std::min(best, segment_distance(x, v[i], v[(i + 1) % v.size()]));
    return best;
}

nlohmann::json DomainSpec::to_json() const {
    if (auto* i = std::get_if<Interval>(&shape)) return {{"shape", "interval"}, {"a", i->a}, {"b", i->b}};
    if (auto* d = std::get_if<Disc>(&shape))
        return {{"shape", "disc"}, {"center", {d->center[0], d->center[1]}}, {"radius", d->radius}};
    nlohmann::json v = nlohmann::json::array();
    for (const auto& p : std::get<Polygon>(shape).vertices) v.push_back({p[0], p[1]});
    return {{"shape", "polygon"}, {"vertices", v}};
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_parameter, m); };
    if (!j.is_object() || !j.contains("shape") || !j.at("shape").is_string())
        fail("domain.shape: expected a string");
    const std::string s = j.at("shape").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            fail(std::string("domain.") + key + ": expected a number");
        return j.at(key).get<double>();
    };
    auto point = [&](const nlohmann::json& p, const std::string& path) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            fail(path + ": expected [x, y]");
        return Point(p[0].get<double>(), p[1].get<double>());
    };
    if (s == "interval") return interval(num("a"), num("b"));
    if (s == "disc") {
        if (!j.contains("center")) fail("domain.center: missing");
        return disc(point(j.at("center"), "domain.center"), num("radius"));
    }
    if (s == "polygon") {
        if (!j.contains("vertices") || !j.at("vertices").is_array()) fail("domain.vertices: expected an array");
        std::vector<Point> v;
        for (std::size_t i = 0; i < j.at("vertices").size(); ++i)
            v.push_back(point(j.at("vertices")[i], "domain.vertices[" + std::to_string(i) + "]"));
        return polygon(std::move(v));
    }
    fail("domain.shape: unknown shape '" + s + "'");
    return {};
}

bool Region::contains(const Point& x) const {
    if (empty) return false;
    const double dist = base.boundary_distance(x);
    if (kind == Kind::shrinkage) return base.contains(x) && dist > delta;
    return !base.contains(x) && dist > 0.0 && dist < delta;
}

Region shrink(const DomainSpec& dom, double delta) {
    if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_parameter, "delta must be nonnegative");
    Region r;
    r.kind = Region::Kind::shrinkage;
    r.base = dom;
    r.delta = delta;
    if (delta >= dom.inradius()) {
        r.empty = true;
        r.flagged = true;
        return r;
    }
    if (auto* i = std::get_if<Interval>(&dom.shape)) {
        r.shape = DomainSpec::interval(i->a + delta, i->b - delta);
        r.pieces.push_back({i->a + delta, i->b - delta});
    } else if (auto* d = std::get_if<Disc>(&dom.shape)) {
        r.shape = DomainSpec::disc(d->center, d->radius - delta);
    } else {
        const auto& v = std::get<Polygon>(dom.shape).vertices;
        std::vector<Point> p = v;
        for (std::size_t i = 0; i < v.size() && !p.empty(); ++i)
            p = clip_left(p, v[i], v[(i + 1) % v.size()], delta);
        // drop near-duplicate vertices produced by clipping through corners
        std::vector<Point> q;
        for (const auto& x : p)
            if (q.empty() || (x - q.back()).norm() > 1e-14) q.push_back(x);
        if (q.size() > 1 && (q.front() - q.back()).norm() <= 1e-14) q.pop_back();
        r.shape = DomainSpec{Polygon{q}};
    }
    return r;
}

Region collar(const DomainSpec& dom, double delta) {
    if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_parameter, "delta must be nonnegative");
    Region r;
    r.kind = Region::Kind::collar;
    r.base = dom;
    r.delta = delta;
    r.empty = (delta == 0.0);
    if (auto* i = std::get_if<Interval>(&dom.shape); i && delta > 0.0) {
        r.pieces.push_back({i->a - delta, i->a});
        r.pieces.push_back({i->b, i->b + delta});
    }
    return r;
}

bool ball_inside(const DomainSpec& dom, const Ball& ball) {
    const double tol = 1e-12 * std::max(1.0, dom.diameter());
    if (auto* i = std::get_if<Interval>(&dom.shape)) {
        return ball.center[0] - ball.radius >= i->a - tol && ball.center[0] + ball.radius <= i->b + tol;
    }
    if (!dom.contains(ball.center)) return false;
    return dom.boundary_distance(ball.center) + tol >= ball.radius;
}

double shrunk_kernel_mass(const KernelSpec& k, const DomainSpec& dom, double delta) {
    const Region inner = shrink(dom, delta);
    if (inner.empty) return 0.0;
    if (auto* i = std::get_if<Interval>(&dom.shape)) {
        // both endpoints see the same mass by symmetry of the kernel
        const double len = i->b - i->a;
        return radial_integral(k, [&](double r) { return k(r); }, delta, len - delta, 0.0);
    }
    if (auto* d = std::get_if<Disc>(&dom.shape)) {
        const double rho = d->radius;
        const double rin = rho - delta;
        // circle of radius t about a boundary point meets the shrunk disc in
        // an arc of half-angle theta(t)
        auto g = [&](double t) {
            const double c = (t * t + rho * rho - rin * rin) / (2.0 * t * rho);
            return k(t) * 2.0 * std::acos(std::clamp(c, -1.0, 1.0)) * t;
        };
        return radial_integral(k, g, delta, 2.0 * rho - delta, 0.0);
    }
    const auto& v = std::get<Polygon>(dom.shape).vertices;
    const auto& q = std::get<Polygon>(inner.shape->shape).vertices;
    double best = inf;
    for (std::size_t e = 0; e < v.size(); ++e) {
        for (int s = 0; s < 8; ++s) {
            const Point a = v[e] + (v[(e + 1) % v.size()] - v[e]) * (s / 8.0);
            double sum = 0.0;
            const int sectors = 256;
            for (int j = 0; j < sectors; ++j) {
                const double t0 = 2.0 * std::numbers::pi * j / sectors;
                const double t1 = 2.0 * std::numbers::pi * (j + 1) / sectors;
                integrate::gauss_visit(t0, t1, [&](double th, double w) {
                    const Point dir(std::cos(th), std::sin(th));
                    auto [lo, hi] = ray_span(q, a, dir);
                    if (hi > lo)
                        sum += w * radial_integral(k, [&](double t) { return k(t) * t; }, lo, hi, 0.0);
                });
            }
            best = std::min(best, sum);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// meshes

double DomainMesh::a() const { return std::get<Interval>(domain.shape).a; }
double DomainMesh::b() const { return std::get<Interval>(domain.shape).b; }

std::vector<int> DomainMesh::interior_elements() const {
    std::vector<int> out;
    for (std::size_t e = 0; e < elements.size(); ++e)
        if (elements[e].tag == Tag::interior) out.push_back(static_cast<int>(e));
    return out;
}

std::vector<int> DomainMesh::collar_elements() const {
    std::vector<int> out;
    for (std::size_t e = 0; e < elements.size(); ++e)
        if (elements[e].tag == Tag::collar) out.push_back(static_cast<int>(e));
    return out;
}

nlohmann::json DomainMesh::to_json() const {
    nlohmann::json els = nlohmann::json::array();
    for (const auto& e : elements) {
        els.push_back({{"nodes", {e.nodes[0], e.nodes[1]}},
                       {"tag", e.tag == Tag::interior ? "interior" : "collar"}});
    }
    return {{"domain", domain.to_json()},
            {"vertices", vertices},
            {"elements", els},
            {"boundary_distance", boundary_distance},
            {"h", h},
            {"r_trunc", r_trunc},
            {"far_field", far_field},
            {"collar", {collar_lo, collar_hi}}};
}

namespace {

// Element sizes for a collar of length `len` graded away from the boundary.
std::vector<double> graded_sizes(double len, double h_min, double ratio, double cap) {
    std::vector<double> sizes;
    double used = 0.0;
    double s = std::min(h_min, len);
    while (used < len) {
        const double rest = len - used;
        if (rest <= 1.5 * s) {
            if (!sizes.empty() && rest < sizes.back()) sizes.back() += rest;
            else sizes.push_back(rest);
            break;
        }
        sizes.push_back(s);
        used += s;
        s = std::min(s / ratio, cap);
    }
    return sizes;
}

}  // namespace

DomainMesh build_mesh(const DomainSpec& dom, const KernelSpec& k, double h, double r_trunc,
                      const MeshOptions& opts) {
    const auto* iv = std::get_if<Interval>(&dom.shape);
    if (!iv) throw Error(ErrorCode::invalid_domain, "meshing is implemented for intervals only");
    if (k.dimension() != 1) throw Error(ErrorCode::invalid_parameter, "kernel dimension must match domain");
    if (!(h > 0.0)) throw Error(ErrorCode::invalid_parameter, "mesh size h must be positive");
    if (!(opts.grading_ratio > 0.0 && opts.grading_ratio <= 1.0))
        throw Error(ErrorCode::invalid_parameter, "grading ratio must lie in (0, 1]");
    if (!(opts.min_size_factor > 0.0 && opts.min_size_factor <= 1.0))
        throw Error(ErrorCode::invalid_parameter, "minimum size factor must lie in (0, 1]");
    if (!(opts.collar_max_size > 0.0))
        throw Error(ErrorCode::invalid_parameter, "collar maximum size must be positive");
    const double a = iv->a;
    const double b = iv->b;

    DomainMesh m;
    m.domain = dom;
    m.h = h;
    m.far_field = k.has_full_support();
    double left_len, right_len;
    if (m.far_field) {
        if (!(r_trunc > dom.diameter()))
            throw Error(ErrorCode::invalid_parameter, "R_trunc must exceed diam(Omega)");
        if (!(r_trunc > std::max(std::abs(a), std::abs(b))))
            throw Error(ErrorCode::invalid_parameter, "the ball B_R must contain Omega");
        m.r_trunc = r_trunc;
        m.collar_lo = -r_trunc;
        m.collar_hi = r_trunc;
    } else {
        const double delta = k.support_radius();
        m.r_trunc = 0.0;
        m.collar_lo = a - delta;
        m.collar_hi = b + delta;
    }
    left_len = a - m.collar_lo;
    right_len = m.collar_hi - b;

    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
    const double h_min = h * opts.min_size_factor;
    const auto left = graded_sizes(left_len, h_min, opts.grading_ratio, opts.collar_max_size);
    const auto right = graded_sizes(right_len, h_min, opts.grading_ratio, opts.collar_max_size);

    std::vector<double>& v = m.vertices;
    v.push_back(m.collar_lo);
    {
        double x = a;
        std::vector<double> pts;
        for (double s : left) {
            x -= s;
            pts.push_back(x);
        }
        pts.back() = m.collar_lo;
        for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) v.push_back(*it);
    }
    std::vector<Tag> tags(left.size(), Tag::collar);
    for (int i = 0; i < n; ++i) {
        v.push_back(a + (b - a) * i / n);
        tags.push_back(Tag::interior);
    }
    v.push_back(b);
    {
        double x = b;
        for (std::size_t i = 0; i < right.size(); ++i) {
            x += right[i];
            v.push_back(i + 1 == right.size() ? m.collar_hi : x);
            tags.push_back(Tag::collar);
        }
    }
    for (std::size_t e = 0; e + 1 < v.size(); ++e) {
        Element el;
        el.nodes = {static_cast<int>(e), static_cast<int>(e + 1)};
        el.left = v[e];
        el.right = v[e + 1];
        el.tag = tags[e];
        m.elements.push_back(el);
    }
    for (double x : v) m.boundary_distance.push_back((x == a || x == b) ? 0.0 : dom.boundary_distance(point1d(x)));
    return m;
}

}  // namespace nlcvp
