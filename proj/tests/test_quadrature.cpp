#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlcvp/error.hpp"
#include "nlcvp/quadrature.hpp"

using namespace nlcvp;
using doctest::Approx;

namespace {

Element element(double l, double r, Tag t = Tag::interior) {
    Element e;
    e.left = l;
    e.right = r;
    e.tag = t;
    return e;
}

LinearPair swap(const LinearPair& p) { return {p.on_e2, p.on_e1}; }

}  // namespace

TEST_CASE("pair integral of constants vanishes") {
    const auto k = make_fractional(1, 0.5);
    const LinearPair one{{1.0, 1.0}, {1.0, 1.0}};
    const auto e1 = element(0.0, 0.25), e2 = element(0.25, 0.5);
    CHECK(pair_integral(e1, e1, k, one, one) == 0.0);
    CHECK(std::abs(pair_integral(e1, e2, k, one, one)) < 1e-15);
}

TEST_CASE("pair integral beyond the kernel support vanishes") {
    const auto k = make_peridynamic(1, 0.5, 1.0);
    const LinearPair p{{0.0, 1.0}, {1.0, 0.0}};
    CHECK(pair_integral(element(0.0, 0.25), element(1.5, 1.75, Tag::collar), k, p, p) == 0.0);
}

TEST_CASE("identical element, hat functions, closed form") {
    // (x - y)^2 / h^2 * a |x - y|^{-3/2} over (0,h)^2 = a * 8 sqrt(h) / 15
    const double a = 0.5 * 1.5 / 4.0;
    for (double h : {1.0, 0.125, 1.0 / 64}) {
        const auto e = element(0.0, h);
        const LinearPair up{{0.0, 1.0}, {0.0, 1.0}}, down{{1.0, 0.0}, {1.0, 0.0}};
        const auto k = make_fractional(1, 0.5);
        const double expect = a * 8.0 * std::sqrt(h) / 15.0;
        CHECK(pair_integral(e, e, k, up, up) == Approx(expect).epsilon(1e-10));
        CHECK(pair_integral(e, e, k, up, down) == Approx(-expect).epsilon(1e-10));
    }
    // same for alpha = 1.5: a * 2 h^{1/2} ... exponent 2 - 1 - 1.5 = -0.5
    // int int |x-y|^{-1/2} = 2 int_0^h (h - r) r^{-1/2} dr = 8 h^{3/2} / 3
    const auto k = make_fractional(1, 1.5);
    const double a15 = 1.5 * 0.5 / 4.0;
    const double h = 0.25;
    const LinearPair up{{0.0, 1.0}, {0.0, 1.0}};
    CHECK(pair_integral(element(0.0, h), element(0.0, h), k, up, up) ==
          Approx(a15 * 8.0 * std::pow(h, 1.5) / 3.0 / (h * h)).epsilon(1e-10));
}

TEST_CASE("touching elements, closed form") {
    // indicator of the left element: int_0^h int_h^2h a |x-y|^{-3/2} = 4 a sqrt(h) (2 - sqrt 2)
    const double a = 0.5 * 1.5 / 4.0;
    const double h = 0.125;
    const LinearPair ind{{1.0, 1.0}, {0.0, 0.0}};
    const double v = pair_integral(element(0.0, h), element(h, 2 * h), make_fractional(1, 0.5), ind, ind);
    CHECK(v == Approx(4.0 * a * std::sqrt(h) * (2.0 - std::sqrt(2.0))).epsilon(1e-10));

    // separated by a gap g, alpha = 1: int int 1/4 (y - x)^-2 = 1/4 ln((g + h)^2 / (g (g + 2h)))
    const double g = 0.3;
    const double w = pair_integral(element(0.0, h), element(h + g, 2 * h + g, Tag::collar), make_fractional(1, 1.0), ind, ind);
    CHECK(w == Approx(0.25 * std::log((g + h) * (g + h) / (g * (g + 2 * h)))).epsilon(1e-10));
}

TEST_CASE("pair integral symmetry") {
    const auto e1 = element(0.0, 0.125), e2 = element(0.125, 0.3), e3 = element(0.7, 1.2, Tag::collar);
    const LinearPair pa{{0.3, -1.2}, {-1.2, 2.0}}, pb{{1.0, 0.5}, {0.5, 0.1}};  // continuous at 0.125
    for (const auto& k : {make_fractional(1, 0.5), make_fractional(1, 1.0), make_fractional(1, 1.7),
                          make_peridynamic(1, 0.4, 2.0), make_rescaled(make_peridynamic(1, 1.0, 1.5), 1.2)}) {
        for (const auto* pair : {&e2, &e3}) {
            const double v = pair_integral(e1, *pair, k, pa, pb);
            CHECK(pair_integral(e1, *pair, k, pb, pa) == Approx(v).epsilon(1e-12));
            CHECK(pair_integral(*pair, e1, k, swap(pa), swap(pb)) == Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("variable transform agrees with the semi-analytic path") {
    QuadRule vt;
    vt.strategy = QuadRule::Strategy::variable_transform;
    const auto e1 = element(0.0, 0.125), e2 = element(0.125, 0.25);
    const LinearPair pa{{0.0, 1.0}, {1.0, 0.0}}, same{{0.0, 1.0}, {0.0, 1.0}};
    for (double a : {0.5, 1.0, 1.5}) {
        const auto k = make_fractional(1, a);
        CHECK(pair_integral(e1, e2, k, pa, pa, vt) == Approx(pair_integral(e1, e2, k, pa, pa)).epsilon(1e-8));
        CHECK(pair_integral(e1, e1, k, same, same, vt) == Approx(pair_integral(e1, e1, k, same, same)).epsilon(1e-8));
    }
}

TEST_CASE("pointwise L of constants and linear functions") {
    for (const auto& k : {make_fractional(1, 0.5), make_fractional(1, 1.5), make_peridynamic(1, 0.3, 1.0)}) {
        for (double x : {-0.5, 0.0, 0.4}) {
            const auto c = pointwise_L(k, [](double) { return 3.0; }, x, 0.1);
            CHECK(c.truncated == 0.0);
            CHECK(c.full == 0.0);
            if (k.has_full_support()) continue;  // x is not integrable against a heavy tail
            const auto l = pointwise_L(k, [](double y) { return y; }, x, 0.1);
            CHECK(std::abs(l.truncated) < 1e-12);
            CHECK(std::abs(l.full) < 1e-12);
        }
    }
    // a bounded odd function about x
    const auto k = make_fractional(1, 1.0);
    CHECK(std::abs(pointwise_L_full(k, [](double y) { return std::atan(y - 0.2); }, 0.2)) < 1e-10);
}

TEST_CASE("pointwise L of a Lorentzian, closed form") {
    // symbol of L for alpha = 1 is pi |xi| / 4
    const auto k = make_fractional(1, 1.0);
    const Field u = [](double x) { return 1.0 / (1.0 + x * x); };
    for (double x : {0.0, 0.5, 1.0, 3.0}) {
        const double exact = std::numbers::pi / 4.0 * (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
        CHECK(std::abs(pointwise_L_full(k, u, x) - exact) <= 1e-8);
    }
}

TEST_CASE("truncated operator converges") {
    const auto k = make_fractional(1, 1.0);
    const Field bump = [](double x) { return std::exp(-x * x); };
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const auto r = pointwise_L(k, bump, 0.3, eps);
        const double gap = std::abs(r.truncated - r.full);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-3);
    CHECK_THROWS_AS(pointwise_L(k, bump, 0.3, 0.0), Error);
}

TEST_CASE("second difference bound") {
    // ||phi||_{C^2} for exp(-x^2): 1 + sqrt(2/e) + 2
    const double c2 = 1.0 + std::sqrt(2.0 / std::numbers::e) + 2.0;
    const Field phi = [](double x) { return std::exp(-x * x); };
    for (double a : {0.5, 1.0, 1.5, 1.9}) {
        const auto k = make_fractional(1, a);
        for (double x : {0.0, 0.3, 1.0, 2.5}) CHECK(std::abs(pointwise_L_full(k, phi, x)) <= 4.0 * c2);
    }
}

TEST_CASE("pointwise N") {
    const auto k = make_fractional(1, 1.0);
    const auto omega = DomainSpec::interval(0.0, 1.0);
    CHECK(pointwise_N(k, [](double) { return 2.0; }, 2.0, omega) == 0.0);
    CHECK(pointwise_N(k, [](double x) { return x; }, 2.0, omega) == Approx(0.25 * std::log(2.0)).epsilon(1e-12));
    // u = 1_Omega seen from y = 2: -int_0^1 (1/4) (2 - x)^-2 dx = -1/8
    const Field ind = [](double x) { return (x > 0.0 && x < 1.0) ? 1.0 : 0.0; };
    CHECK(pointwise_N(k, ind, 2.0, omega) == Approx(-0.125).epsilon(1e-12));
    CHECK(pointwise_N(k, ind, -1.0, omega) == Approx(-0.125).epsilon(1e-12));
    CHECK_THROWS_AS(pointwise_N(k, ind, 0.5, omega), Error);
    CHECK_THROWS_AS(pointwise_N(k, ind, 1.0, omega), Error);
    // compact kernel out of reach
    CHECK(pointwise_N(make_peridynamic(1, 0.5, 1.0), [](double x) { return x; }, 2.0, omega) == 0.0);
}

TEST_CASE("far-field coupling") {
    const auto k = make_fractional(1, 1.0);
    const auto e = element(0.0, 1.0);
    // (1/4) [ln(3/2) + ln(4/3)]
    CHECK(far_field_coupling(k, e, {1.0, 1.0}, 3.0) == Approx(0.25 * std::log(2.0)).epsilon(1e-10));
    CHECK(far_weight(k, 0.0, 3.0) == Approx(0.25 * 2.0 / 3.0).epsilon(1e-12));
    double prev = INFINITY;
    for (double R : {2.0, 3.0, 5.0, 10.0, 100.0}) {
        const double w = far_field_coupling(k, e, {1.0, 0.0}, R);
        CHECK(w > 0.0);
        CHECK(w < prev);
        prev = w;
    }
    CHECK(far_field_coupling(make_peridynamic(1, 0.5, 1.0), e, {1.0, 1.0}, 3.0) == 0.0);
}

TEST_CASE("quadrature rule validation") {
    QuadRule r;
    r.order = 0;
    CHECK_THROWS_AS(r.validate(), Error);
    r.order = 20;
    r.target_rel_tol = 0.0;
    CHECK_THROWS_AS(r.validate(), Error);
}
