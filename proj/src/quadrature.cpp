#include "nlcvp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlcvp/error.hpp"
#include "nlcvp/integrate.hpp"

namespace nlcvp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double machine_eps = std::numeric_limits<double>::epsilon();

using Poly = std::array<double, 4>;  // coefficients of 1, rho, rho^2, rho^3

// Antiderivative of (A0 + A1 Y + A2 Y^2) in Y evaluated at Y = l0 + l1 rho,
// with A0 quadratic, A1 linear and A2 constant in rho.
Poly antiderivative_at(const Poly& A0, const Poly& A1, double A2, double l0, double l1) {
    const Poly L1{l0, l1, 0.0, 0.0};
    const Poly L2{l0 * l0, 2.0 * l0 * l1, l1 * l1, 0.0};
    const Poly L3{l0 * l0 * l0, 3.0 * l0 * l0 * l1, 3.0 * l0 * l1 * l1, l1 * l1 * l1};
    Poly out{};
    // A0 * L1 (degree 2 x 1)
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 1; ++j)
            if (i + j <= 3) out[i + j] += A0[i] * L1[j];
    // A1 * L2 / 2 (degree 1 x 2)
    for (int i = 0; i <= 1; ++i)
        for (int j = 0; j <= 2; ++j) out[i + j] += 0.5 * A1[i] * L2[j];
    for (int j = 0; j <= 3; ++j) out[j] += A2 * L3[j] / 3.0;
    return out;
}

}  // namespace

void QuadRule::validate() const {
    if (order < 2) throw Error(ErrorCode::invalid_parameter, "quadrature order must be at least 2");
    if (!(target_rel_tol > 0.0 && target_rel_tol <= 1e-4))
        throw Error(ErrorCode::invalid_parameter, "target_rel_tol must lie in (0, 1e-4]");
}

nlohmann::json QuadRule::to_json() const {
    return {{"order", order},
            {"strategy", strategy == Strategy::semi_analytic_1d ? "semi-analytic-1d" : "variable-transform"},
            {"target_rel_tol", target_rel_tol}};
}

PairIntegrator::PairIntegrator(const Element& e1, const Element& e2, const KernelSpec& k,
                               const QuadRule& rule)
    : e1_(e1), e2_(e2) {
    if (k.dimension() != 1) throw Error(ErrorCode::invalid_parameter, "pair integrals are one-dimensional");
    const bool identical = e1.left == e2.left && e1.right == e2.right;
    if (identical) {
        c1_ = c2_ = e1.left;
    } else if (e1.right == e2.left) {
        c1_ = c2_ = e1.right;
    } else if (e1.left == e2.right) {
        c1_ = c2_ = e1.left;
    } else {
        c1_ = e1.mid();
        c2_ = e2.mid();
    }
    const double gap = std::max({0.0, e2.left - e1.right, e1.left - e2.right});
    const double support = k.support_radius();
    if (gap >= support) return;

    const double P0 = e1.left - c1_, P1 = e1.right - c1_;
    const double Q0 = e2.left - c2_, Q1 = e2.right - c2_;
    const double s0 = c1_ - c2_;
    const double lo = P0 - Q1, hi = P1 - Q0;

    std::vector<double> cuts{lo, hi, P0 - Q0, P1 - Q1, -s0};
    std::vector<double> radii = k.breakpoints();
    if (auto core = k.power_law_core(); core && std::isfinite(core->radius)) radii.push_back(core->radius);
    for (double r : radii) {
        cuts.push_back(-s0 - r);
        cuts.push_back(-s0 + r);
    }
    std::erase_if(cuts, [&](double c) { return c < lo || c > hi; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto core = k.power_law_core();
    const bool analytic = core && rule.strategy == QuadRule::Strategy::semi_analytic_1d;
    const double beta = core ? core->order : k.singularity_order();

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Piece p{};
        p.lo = cuts[i];
        p.hi = cuts[i + 1];
        if (!(p.hi > p.lo)) continue;
        const double m = 0.5 * (p.lo + p.hi);
        if (std::abs(s0 + m) > support) continue;
        if (Q0 >= P0 - m) { p.l0 = Q0; p.l1 = 0.0; }
        else { p.l0 = P0; p.l1 = -1.0; }
        if (Q1 <= P1 - m) { p.u0 = Q1; p.u1 = 0.0; }
        else { p.u0 = P1; p.u1 = -1.0; }
        if ((p.u0 + p.u1 * m) <= (p.l0 + p.l1 * m)) continue;

        const bool touches = s0 == 0.0 && (p.lo == 0.0 || p.hi == 0.0);
        p.moment.fill(0.0);
        if (touches) {
            const double w = std::max(std::abs(p.lo), std::abs(p.hi));
            const double sign = p.hi == 0.0 ? -1.0 : 1.0;  // rho = sign * t
            for (int kk = 0; kk < 4; ++kk) {
                if (!(kk > beta)) {
                    p.moment[kk] = nan;  // divergent; coefficient must vanish
                    continue;
                }
                double t_int;
                if (analytic) {
                    t_int = core->coefficient * std::pow(w, kk - beta) / (kk - beta);
                } else {
                    t_int = radial_integral(k, [&](double t) { return k(t) * std::pow(t, kk); }, 0.0, w,
                                            kk - 1.0 - beta);
                }
                p.moment[kk] = (kk % 2 == 1 && sign < 0.0) ? -t_int : t_int;
            }
        } else {
            integrate::distance_graded_visit(p.lo, p.hi, -s0, [&](double rho, double wt) {
                const double v = wt * k(std::abs(s0 + rho));
                p.moment[0] += v;
                p.moment[1] += v * rho;
                p.moment[2] += v * rho * rho;
                p.moment[3] += v * rho * rho * rho;
            });
        }
        pieces_.push_back(p);
    }
}

double PairIntegrator::product(const Affine& f, const Affine& g) const {
    const Poly af{f.c0, f.cx, 0.0, 0.0};
    const Poly ag{g.c0, g.cx, 0.0, 0.0};
    const double bf = f.cx + f.cy;
    const double bg = g.cx + g.cy;
    const Poly A0{af[0] * ag[0], af[0] * ag[1] + af[1] * ag[0], af[1] * ag[1], 0.0};
    const Poly A1{af[0] * bg + ag[0] * bf, af[1] * bg + ag[1] * bf, 0.0, 0.0};
    const double A2 = bf * bg;
    double total = 0.0;
    for (const auto& p : pieces_) {
        const Poly up = antiderivative_at(A0, A1, A2, p.u0, p.u1);
        const Poly dn = antiderivative_at(A0, A1, A2, p.l0, p.l1);
        const double w = std::max(std::abs(p.lo), std::abs(p.hi));
        double scale = 0.0;
        for (int kk = 0; kk < 4; ++kk) scale += std::abs(up[kk] - dn[kk]) * std::pow(w, kk);
        for (int kk = 0; kk < 4; ++kk) {
            const double q = up[kk] - dn[kk];
            if (std::isnan(p.moment[kk])) {
                if (std::abs(q) * std::pow(w, kk) > 1e-12 * scale)
                    throw Error(ErrorCode::quadrature_failure,
                                "nonintegrable singularity on touching elements [" +
                                    std::to_string(e1_.left) + ", " + std::to_string(e1_.right) +
                                    "] x [" + std::to_string(e2_.left) + ", " +
                                    std::to_string(e2_.right) + "]");
                continue;
            }
            total += q * p.moment[kk];
        }
    }
    return total;
}

namespace {

// value and slope of the linear function with endpoint values v on e,
// expressed about the point c
std::pair<double, double> linear_about(const Element& e, const std::array<double, 2>& v, double c) {
    const double slope = (v[1] - v[0]) / e.size();
    double at;
    if (c == e.left) at = v[0];
    else if (c == e.right) at = v[1];
    else at = v[0] + slope * (c - e.left);
    return {at, slope};
}

}  // namespace

Affine PairIntegrator::difference(const LinearPair& phi) const {
    const auto [a1, s1] = linear_about(e1_, phi.on_e1, c1_);
    const auto [a2, s2] = linear_about(e2_, phi.on_e2, c2_);
    return {a1 - a2, s1, -s2};
}

Affine PairIntegrator::x_part(const std::array<double, 2>& on_e1) const {
    const auto [a1, s1] = linear_about(e1_, on_e1, c1_);
    return {a1, s1, 0.0};
}

Affine PairIntegrator::y_part(const std::array<double, 2>& on_e2) const {
    const auto [a2, s2] = linear_about(e2_, on_e2, c2_);
    return {a2, 0.0, s2};
}

double pair_integral(const Element& e1, const Element& e2, const KernelSpec& k,
                     const LinearPair& pa, const LinearPair& pb, const QuadRule& rule) {
    rule.validate();
    PairIntegrator pi(e1, e2, k, rule);
    return pi.product(pi.difference(pa), pi.difference(pb));
}

PointwiseL pointwise_L(const KernelSpec& k, const Field& u, double x, double eps) {
    if (!(eps > 0.0))
        throw Error(ErrorCode::invalid_parameter,
                    "the exclusion method needs eps > 0; use the second-difference form");
    if (k.dimension() != 1) throw Error(ErrorCode::invalid_parameter, "pointwise L is one-dimensional");
    const double ux = u(x);
    PointwiseL out;
    const double right = radial_integral(k, [&](double r) { return (ux - u(x + r)) * k(r); }, eps, inf, 0.0);
    const double left = radial_integral(k, [&](double r) { return (ux - u(x - r)) * k(r); }, eps, inf, 0.0);
    out.truncated = right + left;
    out.full = pointwise_L_full(k, u, x);
    return out;
}

double pointwise_L_full(const KernelSpec& k, const Field& u, double x) {
    if (k.dimension() != 1) throw Error(ErrorCode::invalid_parameter, "pointwise L is one-dimensional");
    const double ux = u(x);
    auto second = [&](double r) {
        const double up = u(x + r), dn = u(x - r);
        const double d = 2.0 * ux - up - dn;
        // at rounding level the difference is noise the quadrature cannot settle on
        return std::abs(d) <= 8.0 * machine_eps * (std::abs(ux) + std::abs(up) + std::abs(dn)) ? 0.0 : d;
    };
    // below r0 the second difference is lost to rounding; use its quadratic model
    const double r0 = 1e-3;
    const double curv = second(r0) / (r0 * r0);
    double m2;  // int_0^r0 r^2 k(r) dr
    if (const auto core = k.power_law_core(); core && core->radius >= r0) {
        m2 = core->coefficient * std::pow(r0, 2.0 - core->order) / (2.0 - core->order);
    } else {
        auto r2k = [&](double r) {
            const double kr = k(r);
            return std::isfinite(kr) ? r * r * kr : 0.0;
        };
        m2 = radial_integral(k, r2k, 0.0, r0, 1.0 - k.singularity_order());
    }
    auto g = [&](double r) { return second(r) * k(r); };
    return curv * m2 + radial_integral(k, g, r0, inf, 0.0);
}

double pointwise_N(const KernelSpec& k, const Field& u, double y, const DomainSpec& omega) {
    const auto* iv = std::get_if<Interval>(&omega.shape);
    if (!iv) throw Error(ErrorCode::invalid_parameter, "pointwise N is one-dimensional");
    if (y >= iv->a && y <= iv->b)
        throw Error(ErrorCode::invalid_parameter, "pointwise N needs a point outside the closed domain");
    const double uy = u(y);
    std::vector<double> cuts{iv->a, iv->b};
    for (double r : k.breakpoints()) {
        for (double c : {y - r, y + r})
            if (c > iv->a && c < iv->b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        integrate::distance_graded_visit(cuts[i], cuts[i + 1], y, [&](double x, double w) {
            sum += w * (uy - u(x)) * k(std::abs(y - x));
        });
    }
    return sum;
}

double far_weight(const KernelSpec& k, double x, double R) {
    if (!(std::abs(x) < R)) throw Error(ErrorCode::invalid_parameter, "far weight needs |x| < R");
    return one_sided_tail(k, R - x) + one_sided_tail(k, R + x);
}

double far_field_coupling(const KernelSpec& k, const Element& e, const std::array<double, 2>& phi,
                          double R) {
    double sum = 0.0;
    integrate::gauss_visit(e.left, e.right, [&](double x, double w) {
        const double t = (x - e.left) / e.size();
        sum += w * ((1.0 - t) * phi[0] + t * phi[1]) * far_weight(k, x, R);
    });
    return sum;
}

}  // namespace nlcvp
