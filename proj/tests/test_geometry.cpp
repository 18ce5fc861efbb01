#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlcvp/error.hpp"
#include "nlcvp/geometry.hpp"

using namespace nlcvp;
using doctest::Approx;

TEST_CASE("unit interval with a graded collar and far field") {
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), make_fractional(1, 1.0), 0.125, 3.0);
    CHECK(m.far_field);
    CHECK(m.collar_lo == -3.0);
    CHECK(m.collar_hi == 3.0);
    const auto inner = m.interior_elements();
    CHECK(inner.size() == 8);
    double total = 0.0;
    for (int e : inner) {
        CHECK(m.elements[e].size() == Approx(0.125));
        CHECK(m.elements[e].left >= 0.0);
        CHECK(m.elements[e].right <= 1.0);
        total += m.elements[e].size();
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    // sizes grow away from the boundary on both sides
    std::vector<double> left, right;
    for (int e : m.collar_elements()) {
        const auto& el = m.elements[e];
        if (el.right <= 0.0) left.push_back(el.size());
        else right.push_back(el.size());
        CHECK(el.tag == Tag::collar);
    }
    REQUIRE(left.size() > 2);
    REQUIRE(right.size() > 2);
    for (std::size_t i = 1; i + 1 < left.size(); ++i) CHECK(left[i] <= left[i - 1]);  // left is ordered outward-in
    for (std::size_t i = 1; i + 1 < right.size(); ++i) CHECK(right[i] >= right[i - 1]);
    CHECK(right.front() == Approx(0.125 / 32.0));
    CHECK(left.back() == Approx(0.125 / 32.0));

    double collar_len = 0.0;
    for (double s : left) collar_len += s;
    CHECK(collar_len == Approx(3.0).epsilon(1e-12));
}

TEST_CASE("peridynamic collar is exactly the horizon") {
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), make_peridynamic(1, 0.25, 1.0), 0.125, 7.0);
    CHECK_FALSE(m.far_field);
    CHECK(m.collar_lo == -0.25);
    CHECK(m.collar_hi == 1.25);
    CHECK(m.vertices.front() == -0.25);
    CHECK(m.vertices.back() == 1.25);
}

TEST_CASE("mesh is conforming and sorted") {
    const auto m = build_mesh(DomainSpec::interval(-1.0, 2.0), make_fractional(1, 0.5), 0.2, 5.0);
    for (std::size_t i = 1; i < m.vertices.size(); ++i) CHECK(m.vertices[i] > m.vertices[i - 1]);
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        const auto& el = m.elements[e];
        CHECK(m.vertices[el.nodes[0]] == el.left);
        CHECK(m.vertices[el.nodes[1]] == el.right);
        if (e > 0) CHECK(el.left == m.elements[e - 1].right);
    }
    double total = 0.0;
    for (int e : m.interior_elements()) total += m.elements[e].size();
    CHECK(std::abs(total - 3.0) <= 1e-12);
}

TEST_CASE("boundary distance vanishes on the boundary") {
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), make_fractional(1, 1.0), 0.125, 2.0);
    int on_boundary = 0;
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        const double x = m.vertices[v];
        if (x == 0.0 || x == 1.0) {
            CHECK(m.boundary_distance[v] == 0.0);
            ++on_boundary;
        } else {
            CHECK(m.boundary_distance[v] == Approx(std::min(std::abs(x), std::abs(x - 1.0))));
        }
    }
    CHECK(on_boundary == 2);
}

TEST_CASE("refining halves the interior element size") {
    const auto k = make_fractional(1, 1.0);
    const auto dom = DomainSpec::interval(0.0, 1.0);
    double prev = 0.0;
    for (double h : {0.25, 0.125, 0.0625}) {
        const auto m = build_mesh(dom, k, h, 2.0);
        double mx = 0.0;
        for (int e : m.interior_elements()) mx = std::max(mx, m.elements[e].size());
        if (prev > 0.0) CHECK(mx == Approx(prev / 2.0));
        prev = mx;
    }
}

TEST_CASE("shrinkage and collar of an interval") {
    const auto dom = DomainSpec::interval(0.0, 1.0);
    const auto s0 = shrink(dom, 0.0);
    REQUIRE(s0.pieces.size() == 1);
    CHECK(s0.pieces[0].a == 0.0);
    CHECK(s0.pieces[0].b == 1.0);

    const auto s = shrink(dom, 0.1);
    REQUIRE(s.pieces.size() == 1);
    CHECK(s.pieces[0].a == Approx(0.1));
    CHECK(s.pieces[0].b == Approx(0.9));
    CHECK(s.contains(point1d(0.5)));
    CHECK_FALSE(s.contains(point1d(0.05)));
    CHECK_FALSE(s.flagged);

    const auto e = shrink(dom, 0.6);
    CHECK(e.empty);
    CHECK(e.flagged);
    CHECK_FALSE(e.contains(point1d(0.5)));

    const auto c = collar(dom, 0.25);
    REQUIRE(c.pieces.size() == 2);
    CHECK(c.pieces[0].a == Approx(-0.25));
    CHECK(c.pieces[0].b == 0.0);
    CHECK(c.pieces[1].a == 1.0);
    CHECK(c.pieces[1].b == Approx(1.25));
    CHECK(c.contains(point1d(1.1)));
    CHECK_FALSE(c.contains(point1d(0.5)));
    CHECK_FALSE(c.contains(point1d(1.3)));
}

TEST_CASE("disc shrinks concentrically") {
    const auto dom = DomainSpec::disc(Point::Zero(), 1.0);
    CHECK(dom.dimension() == 2);
    CHECK(dom.measure() == Approx(std::numbers::pi));
    const auto s = shrink(dom, 0.5);
    REQUIRE(s.shape);
    const auto* d = std::get_if<Disc>(&s.shape->shape);
    REQUIRE(d);
    CHECK(d->radius == Approx(0.5));
    CHECK(d->center.norm() == 0.0);
    CHECK(s.contains(Point(0.3, 0.0)));
    CHECK_FALSE(s.contains(Point(0.6, 0.0)));
    CHECK(dom.boundary_distance(Point(1.0, 0.0)) == 0.0);
}

TEST_CASE("polygon") {
    const auto sq = DomainSpec::polygon({Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)});
    CHECK(sq.measure() == Approx(1.0));
    CHECK(sq.diameter() == Approx(std::sqrt(2.0)));
    CHECK(sq.inradius() == Approx(0.5));
    CHECK(sq.contains(Point(0.5, 0.5)));
    CHECK(sq.boundary_distance(Point(0.5, 0.2)) == Approx(0.2));
    const auto s = shrink(sq, 0.1);
    CHECK(s.contains(Point(0.5, 0.5)));
    CHECK_FALSE(s.contains(Point(0.05, 0.5)));
    CHECK(shrink(sq, 0.5).empty);
}

TEST_CASE("degenerate domains are rejected") {
    auto code = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::solver_failure;
    };
    CHECK(code([] { DomainSpec::interval(1.0, 1.0); }) == ErrorCode::invalid_domain);
    CHECK(code([] { DomainSpec::disc(Point::Zero(), 0.0); }) == ErrorCode::invalid_domain);
    CHECK(code([] { DomainSpec::polygon({Point(0, 0), Point(1, 1), Point(2, 2)}); }) == ErrorCode::invalid_domain);
    CHECK(code([] { build_mesh(DomainSpec::interval(0, 1), make_fractional(1, 1.0), 0.1, 0.5); }) ==
          ErrorCode::invalid_parameter);
}

TEST_CASE("domain json round trip") {
    const auto dom = DomainSpec::interval(-0.5, 2.0);
    const auto back = DomainSpec::from_json(dom.to_json());
    const auto* iv = std::get_if<Interval>(&back.shape);
    REQUIRE(iv);
    CHECK(iv->a == -0.5);
    CHECK(iv->b == 2.0);
}
