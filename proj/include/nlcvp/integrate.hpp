#pragma once

// One-dimensional integration rules shared by every module. Boost.Math
// provides the double-exponential and Gauss-Kronrod engines; the fixed
// Gauss-Legendre rule and the geometric grading live here.

// Boost's tanh-sinh asserts on abscissae that round onto an endpoint; the
// wrappers below clamp those instead.
#ifndef BOOST_DISABLE_ASSERTS
#define BOOST_DISABLE_ASSERTS
#endif

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nlcvp/error.hpp"

namespace nlcvp::integrate {

inline constexpr int gauss_points = 20;

struct GaussRule {
    std::array<double, gauss_points> nodes;    // on [-1, 1]
    std::array<double, gauss_points> weights;
};

inline const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, gauss_points>;
        GaussRule r{};
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        const int half = gauss_points / 2;
        for (int i = 0; i < half; ++i) {
            r.nodes[half - 1 - i] = -x[i];
            r.weights[half - 1 - i] = w[i];
            r.nodes[half + i] = x[i];
            r.weights[half + i] = w[i];
        }
        return r;
    }();
    return rule;
}

/// Calls `visit(x, w)` for the 20-point Gauss-Legendre rule mapped to [a, b].
template <class Visit>
void gauss_visit(double a, double b, Visit&& visit) {
    const auto& rule = gauss_rule();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < gauss_points; ++i) {
        visit(mid + half * rule.nodes[i], half * rule.weights[i]);
    }
}

template <class F>
double gauss(F&& f, double a, double b) {
    double sum = 0.0;
    gauss_visit(a, b, [&](double x, double w) { sum += w * f(x); });
    return sum;
}

/// Visits a Gauss rule on cells of [a, b] graded geometrically toward `a`
/// (ratio `sigma`, `levels` cells). The innermost cell is integrated too.
template <class Visit>
void graded_visit_left(double a, double b, double sigma, int levels, Visit&& visit) {
    double outer = b;
    const double len = b - a;
    double scale = 1.0;
    for (int k = 0; k < levels; ++k) {
        scale *= sigma;
        const double inner = a + len * scale;
        gauss_visit(inner, outer, visit);
        outer = inner;
    }
    gauss_visit(a, outer, visit);
}

template <class Visit>
void graded_visit_right(double a, double b, double sigma, int levels, Visit&& visit) {
    double outer = a;
    const double len = b - a;
    double scale = 1.0;
    for (int k = 0; k < levels; ++k) {
        scale *= sigma;
        const double inner = b - len * scale;
        gauss_visit(outer, inner, visit);
        outer = inner;
    }
    gauss_visit(outer, b, visit);
}

/// Visits [a, b] with cells whose width never exceeds their distance to the
/// point `s` (assumed outside (a, b) or on its boundary). Used for integrands
/// that are smooth on [a, b] but nearly singular at `s`.
template <class Visit>
void distance_graded_visit(double a, double b, double s, Visit&& visit) {
    if (s <= a) {
        double lo = a;
        while (lo < b) {
            const double dist = lo - s;
            double hi = (dist > 0.0) ? lo + dist : b;
            if (hi >= b || (b - hi) < 1e-3 * (b - a)) hi = b;
            gauss_visit(lo, hi, visit);
            lo = hi;
        }
    } else {
        double hi = b;
        while (hi > a) {
            const double dist = s - hi;
            double lo = (dist > 0.0) ? hi - dist : a;
            if (lo <= a || (lo - a) < 1e-3 * (b - a)) lo = a;
            gauss_visit(lo, hi, visit);
            hi = lo;
        }
    }
}

struct Estimate {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

/// Double-exponential rule on a finite interval; robust to integrable
/// endpoint singularities.
template <class F>
Estimate tanh_sinh(F&& f, double a, double b, double tol = 1e-13) {
    static thread_local boost::math::quadrature::tanh_sinh<double> engine(12);
    Estimate e;
    if (!(b > a)) return e;
    if (b - a <= 1e-6 * std::max(std::abs(a), std::abs(b))) {
        // too short for the double-exponential abscissae to stay distinct
        e.value = gauss(f, a, b);
        e.l1 = gauss([&](double x) { return std::abs(f(x)); }, a, b);
        return e;
    }
    const double a1 = std::nextafter(a, b), b1 = std::nextafter(b, a);
    auto inside = [&](double x) { return f(std::clamp(x, a1, b1)); };
    try {
        e.value = engine.integrate(inside, a, b, tol, &e.error, &e.l1);
    } catch (const std::exception& ex) {
        throw Error(ErrorCode::quadrature_failure, std::string("tanh-sinh: ") + ex.what());
    }
    return e;
}

/// Double-exponential rule on [a, infinity).
template <class F>
Estimate exp_sinh(F&& f, double a, double tol = 1e-13) {
    static thread_local boost::math::quadrature::exp_sinh<double> engine(12);
    Estimate e;
    try {
        e.value = engine.integrate(f, a, std::numeric_limits<double>::infinity(), tol, &e.error,
                                   &e.l1);
    } catch (const std::exception& ex) {
        throw Error(ErrorCode::quadrature_failure, std::string("exp-sinh: ") + ex.what());
    }
    return e;
}

/// Adaptive Gauss-Kronrod (31 points) for smooth integrands.
template <class F>
Estimate kronrod(F&& f, double a, double b, double tol = 1e-13, unsigned max_depth = 18) {
    Estimate e;
    if (!(b > a)) return e;
    e.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, max_depth, tol, &e.error, &e.l1);
    return e;
}

}  // namespace nlcvp::integrate
