#include "nlcvp/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nlcvp/error.hpp"
#include "nlcvp/integrate.hpp"
#include "nlcvp/quadrature.hpp"
#include "nlcvp/solvers.hpp"

namespace nlcvp {

namespace {

constexpr double sigma = 0.25;
constexpr int max_levels = 30;
constexpr double inf = std::numeric_limits<double>::infinity();

// 15-point Gauss-Legendre on [-1, 1], independent of the 20-point engine
struct Rule15 {
    std::array<double, 15> x, w;
};

const Rule15& rule15() {
    static const Rule15 r = [] {
        using G = boost::math::quadrature::gauss<double, 15>;
        Rule15 out{};
        const auto& ax = G::abscissa();
        const auto& aw = G::weights();
        // abscissa()[0] == 0 for odd orders
        out.x[7] = ax[0];
        out.w[7] = aw[0];
        for (int i = 1; i < 8; ++i) {
            out.x[7 - i] = -ax[i];
            out.w[7 - i] = aw[i];
            out.x[7 + i] = ax[i];
            out.w[7 + i] = aw[i];
        }
        return out;
    }();
    return r;
}

template <class Visit>
void cell(double a, double b, Visit& visit) {
    const auto& r = rule15();
    const double m = 0.5 * (a + b), hl = 0.5 * (b - a);
    for (int i = 0; i < 15; ++i) visit(m + hl * r.x[i], hl * r.w[i]);
}

int levels_for(double dist, double len) {
    if (dist <= 1e-15 * len) return max_levels;
    const int l = static_cast<int>(std::ceil(std::log(dist / len) / std::log(sigma))) + 1;
    return std::clamp(l, 1, max_levels);
}

// Gauss-15 on [a, b] graded geometrically toward the point s (outside or on
// the boundary of [a, b]).
template <class Visit>
void toward(double a, double b, double s, Visit& visit) {
    const double len = b - a;
    if (len <= 0.0) return;
    // cells below the floating-point resolution at a, b would collapse onto s
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(s);
    const int cap =
        floor > 0.0 ? std::clamp(static_cast<int>(std::log(floor / len) / std::log(sigma)), 1, max_levels) : max_levels;
    if (s <= a) {
        const int lv = std::min(cap, levels_for(a - s, len));
        double hi = b;
        for (int k = 1; k <= lv; ++k) {
            const double lo = a + len * std::pow(sigma, k);
            cell(lo, hi, visit);
            hi = lo;
        }
        cell(a, hi, visit);
    } else {
        const int lv = std::min(cap, levels_for(s - b, len));
        double lo = a;
        for (int k = 1; k <= lv; ++k) {
            const double hi = b - len * std::pow(sigma, k);
            cell(lo, hi, visit);
            lo = hi;
        }
        cell(lo, b, visit);
    }
}

// Splits [a, b] at the interior cut points and grades every piece toward the
// nearest singular point.
template <class Visit>
void graded(double a, double b, std::vector<double> cuts, const std::vector<double>& singular, Visit& visit) {
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(a, cuts[i]), hi = std::min(b, cuts[i + 1]);
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        // grade each half toward the nearest singular point on its side
        double left_s = -inf, right_s = inf;
        for (double s : singular) {
            if (s <= mid) left_s = std::max(left_s, s);
            if (s >= mid) right_s = std::min(right_s, s);
        }
        toward(lo, mid, std::isfinite(left_s) ? std::min(left_s, lo) : lo - 1e6 * (hi - lo), visit);
        toward(mid, hi, std::isfinite(right_s) ? std::max(right_s, hi) : hi + 1e6 * (hi - lo), visit);
    }
}

// int_s^inf nu(r) dr = int_0^1 nu(s / t) s t^{-2} dt
double tail(const KernelSpec& k, double s) {
    double sum = 0.0;
    auto visit = [&](double t, double w) { sum += w * k(s / t) * s / (t * t); };
    std::vector<double> cuts;
    for (double r : k.breakpoints())
        if (r > s) cuts.push_back(s / r);
    graded(0.0, 1.0, cuts, {0.0}, visit);
    return sum;
}

double hat(const Element& e, int node, double x) {
    const double t = (x - e.left) / (e.right - e.left);
    if (node == e.nodes[0]) return 1.0 - t;
    if (node == e.nodes[1]) return t;
    return 0.0;
}

struct Local {
    std::vector<int> dofs;
    Matrix K, Pc, Nn;
};

// int_{E1} int_{E2} of the four integrands needed for one element pair.
// Coordinates are taken relative to a shared node (or the common left end)
// so that points near the singular corner keep full relative precision.
Local pair(const Element& E1, const Element& E2, const KernelSpec& k, double weight, bool cross) {
    Local r;
    for (int n : {E1.nodes[0], E1.nodes[1], E2.nodes[0], E2.nodes[1]})
        if (std::find(r.dofs.begin(), r.dofs.end(), n) == r.dofs.end()) r.dofs.push_back(n);
    const int nd = static_cast<int>(r.dofs.size());
    r.K = Matrix::Zero(nd, nd);
    r.Pc = Matrix::Zero(nd, nd);
    r.Nn = Matrix::Zero(nd, nd);
    const double gap = std::max({0.0, E2.left - E1.right, E1.left - E2.right});
    if (!k.has_full_support() && gap >= k.support_radius()) return r;
    const auto br = k.breakpoints();

    double c = E1.left;
    if (E1.right == E2.left) c = E1.right;
    if (E1.left == E2.right) c = E1.left;
    const double l1 = E1.left - c, r1 = E1.right - c, l2 = E2.left - c, r2 = E2.right - c;
    // hats as alpha + beta * x in the local coordinates, zero off the element
    Eigen::VectorXd al1 = Eigen::VectorXd::Zero(nd), be1 = al1, al2 = al1, be2 = al1;
    for (int a = 0; a < nd; ++a) {
        const int node = r.dofs[a];
        if (node == E1.nodes[0]) { al1[a] = r1 / (r1 - l1); be1[a] = -1.0 / (r1 - l1); }
        if (node == E1.nodes[1]) { al1[a] = -l1 / (r1 - l1); be1[a] = 1.0 / (r1 - l1); }
        if (node == E2.nodes[0]) { al2[a] = r2 / (r2 - l2); be2[a] = -1.0 / (r2 - l2); }
        if (node == E2.nodes[1]) { al2[a] = -l2 / (r2 - l2); be2[a] = 1.0 / (r2 - l2); }
    }

    std::vector<double> outer_cuts{l2, r2}, outer_sing{l2, r2};
    for (double r0 : br)
        for (double q : {l2 - r0, l2 + r0, r2 - r0, r2 + r0}) {
            outer_cuts.push_back(q);
            outer_sing.push_back(q);
        }

    std::vector<double> F(nd), px(nd), py(nd);
    auto outer = [&](double x, double wx) {
        // inner variable is the offset t = y - x, so |x - y| never loses digits
        std::vector<double> cuts{0.0};
        for (double r0 : br) {
            cuts.push_back(-r0);
            cuts.push_back(r0);
        }
        for (int a = 0; a < nd; ++a) px[a] = al1[a] + be1[a] * x;
        auto inner = [&](double t, double wy) {
            if (t == 0.0) return;
            const double nu = k(std::abs(t));
            if (nu == 0.0) return;
            const double w = wx * wy * nu;
            // F = psi(x) - psi(x + t) without cancellation near the diagonal
            for (int a = 0; a < nd; ++a) {
                py[a] = al2[a] + be2[a] * (x + t);
                F[a] = (al1[a] - al2[a]) + (be1[a] - be2[a]) * x - be2[a] * t;
            }
            for (int a = 0; a < nd; ++a)
                for (int b = 0; b < nd; ++b) {
                    r.K(a, b) += weight * w * F[a] * F[b];
                    if (cross) {
                        r.Pc(a, b) += w * F[b] * px[a];
                        r.Nn(a, b) -= w * F[b] * py[a];
                    }
                }
        };
        graded(l2 - x, r2 - x, cuts, {0.0}, inner);
    };
    graded(l1, r1, outer_cuts, outer_sing, outer);
    return r;
}

// radius where a unimodal profile crosses 1, or 0
double crossing(const KernelSpec& k) {
    if (!(k.unimodal() && k(1e-12) > 1.0 && k(1e12) < 1.0)) return 0.0;
    double a = 1e-12, b = 1e12;
    for (int i = 0; i < 200; ++i) {
        const double m = std::sqrt(a * b);
        (k(m) > 1.0 ? a : b) = m;
    }
    return a;
}

// int_B min(1, nu(y - z)) dz in one dimension
double own_nu_tilde(const KernelSpec& k, const Ball& B, double y) {
    const double lo = B.center[0] - B.radius, hi = B.center[0] + B.radius;
    std::vector<double> cuts{y}, sing{y};
    for (double r0 : k.breakpoints()) {
        cuts.push_back(y - r0);
        cuts.push_back(y + r0);
    }
    if (const double c = crossing(k); c > 0.0) {
        cuts.push_back(y - c);
        cuts.push_back(y + c);
    }
    double sum = 0.0;
    auto visit = [&](double z, double w) {
        const double r = std::abs(y - z);
        sum += w * (r == 0.0 ? 1.0 : std::min(1.0, k(r)));
    };
    graded(lo, hi, cuts, sing, visit);
    return sum;
}

}  // namespace

AssembledSystem dense_reference(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k) {
    if (!space) throw Error(ErrorCode::invalid_parameter, "missing discrete space");
    if (space->size() > oracle_dof_budget)
        throw Error(ErrorCode::budget_exceeded, "dense reference is limited to " +
                                                    std::to_string(oracle_dof_budget) + " DOFs");
    const DomainMesh& mesh = space->mesh;
    const int n = space->size();
    AssembledSystem sys;
    sys.space = space;
    sys.kernel = std::make_shared<const KernelSpec>(k);
    sys.A_inner = Matrix::Zero(n, n);
    sys.A_cross = Matrix::Zero(n, n);
    sys.P = Matrix::Zero(n, n);
    sys.N_op = Matrix::Zero(n, n);

    const auto inner = mesh.interior_elements();
    const auto outer = mesh.collar_elements();
    auto add = [&](const Local& l, bool cross) {
        const int nd = static_cast<int>(l.dofs.size());
        for (int a = 0; a < nd; ++a)
            for (int b = 0; b < nd; ++b) {
                const int i = l.dofs[a], j = l.dofs[b];
                if (cross) {
                    sys.A_cross(i, j) += l.K(a, b);
                    sys.P(i, j) += l.Pc(a, b);
                    sys.N_op(i, j) += l.Nn(a, b);
                } else {
                    sys.A_inner(i, j) += l.K(a, b);
                    sys.P(i, j) += l.K(a, b);
                }
            }
    };
    for (std::size_t i = 0; i < inner.size(); ++i)
        for (std::size_t j = i; j < inner.size(); ++j)
            add(pair(mesh.elements[inner[i]], mesh.elements[inner[j]], k, i == j ? 0.5 : 1.0, false), false);
    for (int i : inner)
        for (int c : outer) add(pair(mesh.elements[i], mesh.elements[c], k, 1.0, true), true);

    if (space->far_dof >= 0) {
        const int f = space->far_dof;
        const double R = mesh.r_trunc;
        for (int e : inner) {
            const auto& el = mesh.elements[e];
            const std::array<int, 3> d{el.nodes[0], el.nodes[1], f};
            auto visit = [&](double x, double wt) {
                const double w = wt * (tail(k, R - x) + tail(k, R + x));
                const std::array<double, 3> F{hat(el, d[0], x), hat(el, d[1], x), -1.0};
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        sys.A_cross(d[a], d[b]) += w * F[a] * F[b];
                        if (a < 2) sys.P(d[a], d[b]) += w * F[b] * F[a];
                    }
                    sys.N_op(f, d[a]) -= w * F[a];
                }
            };
            graded(el.left, el.right, {}, {}, visit);
        }
    }
    sys.A = sys.A_inner + sys.A_cross;

    sys.M = Matrix::Zero(n, n);
    for (int e : inner) {
        const auto& el = mesh.elements[e];
        auto visit = [&](double x, double w) {
            for (int a : el.nodes)
                for (int b : el.nodes) sys.M(a, b) += w * hat(el, a, x) * hat(el, b, x);
        };
        cell(el.left, el.right, visit);
    }

    const Ball base{point1d(0.5 * (mesh.a() + mesh.b())), 0.5 * (mesh.b() - mesh.a())};
    sys.M_tilde = Matrix::Zero(n, n);
    std::vector<double> kinks;
    {
        auto radii = k.breakpoints();
        if (const double c = crossing(k); c > 0.0) radii.push_back(c);
        for (double r0 : radii)
            for (double e : {base.center[0] - base.radius, base.center[0] + base.radius}) {
                kinks.push_back(e - r0);
                kinks.push_back(e + r0);
            }
    }
    for (int e : outer) {
        const auto& el = mesh.elements[e];
        auto visit = [&](double y, double w) {
            const double nt = own_nu_tilde(k, base, y);
            for (int a : el.nodes)
                for (int b : el.nodes) sys.M_tilde(a, b) += w * nt * hat(el, a, y) * hat(el, b, y);
        };
        graded(el.left, el.right, kinks, {}, visit);
    }
    if (space->far_dof >= 0) {
        // int_{|y| > R} nu~ = int_B int_{|y| > R} min(1, nu(y - z)) dy dz
        const double R = mesh.r_trunc;
        auto tail1 = [&](double s) {
            // int_s^inf min(1, nu(r)) dr through r = s / t
            double sum = 0.0;
            auto v = [&](double t, double w) { sum += w * std::min(1.0, k(s / t)) * s / (t * t); };
            std::vector<double> cuts;
            for (double r0 : k.breakpoints())
                if (r0 > s) cuts.push_back(s / r0);
            graded(0.0, 1.0, cuts, {0.0}, v);
            return sum;
        };
        double far = 0.0;
        auto visit = [&](double z, double w) { far += w * (tail1(R - z) + tail1(R + z)); };
        graded(base.center[0] - base.radius, base.center[0] + base.radius, {}, {}, visit);
        sys.M_tilde(space->far_dof, space->far_dof) = far;
    }
    sys.meta = {{"kernel", k.to_json()}, {"oracle", "nested graded Gauss-15"}, {"dofs", n}};
    return sys;
}

// ---------------------------------------------------------------------------

LocalSolution local_reference_1d(const Field& f, double g_left, double g_right) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double total = GK::integrate(f, 0.0, 1.0, 8, 1e-12);
    const double scale = std::max({1.0, std::abs(total), std::abs(g_left), std::abs(g_right)});
    if (std::abs(total + g_left + g_right) > 1e-10 * scale)
        throw Error(ErrorCode::invalid_parameter, "incompatible local Neumann data");

    // u(x) = -g_left x - int_0^x (x - t) f(t) dt, then shifted to mean zero
    auto raw = [f, g_left](double x) {
        if (x == 0.0) return 0.0;
        auto integrand = [&](double t) { return (x - t) * f(t); };
        return -g_left * x - GK::integrate(integrand, 0.0, x, 8, 1e-12);
    };
    const double mean = GK::integrate(raw, 0.0, 1.0, 8, 1e-12);
    LocalSolution s;
    s.u = [raw, mean](double x) { return raw(x) - mean; };
    s.du = [f, g_left](double x) {
        if (x == 0.0) return -g_left;
        return -g_left - GK::integrate(f, 0.0, x, 8, 1e-12);
    };
    return s;
}

// ---------------------------------------------------------------------------

SweepResult alpha_sweep(const SweepOptions& opts) {
    auto phi = [](double x) { return std::exp(-(x - 1.0) * (x - 1.0)); };
    auto dphi = [](double x) { return -2.0 * (x - 1.0) * std::exp(-(x - 1.0) * (x - 1.0)); };
    auto f = [](double x) {
        const double s = x - 1.0;
        return -(4.0 * s * s - 2.0) * std::exp(-s * s);  // -phi''
    };
    auto v = [](double x) { return std::cos(2.0 * x); };
    auto dv = [](double x) { return -2.0 * std::sin(2.0 * x); };

    const auto local = local_reference_1d(f, -dphi(0.0), dphi(1.0));
    SweepResult out;
    {
        double s = 0.0;
        for (int i = 0; i < 64; ++i)
            s += integrate::gauss([&](double x) { return local.u(x) * local.u(x); }, i / 64.0, (i + 1) / 64.0);
        out.local_l2 = std::sqrt(s);
    }
    double local_pairing = 0.0;
    for (int i = 0; i < 16; ++i)
        local_pairing += integrate::gauss([&](double x) { return local.du(x) * dv(x); }, i / 16.0, (i + 1) / 16.0);
    const double boundary_exact = dphi(1.0) - dphi(0.0);
    const auto dom = DomainSpec::interval(0.0, 1.0);

    for (double alpha : opts.alphas) {
        if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::invalid_parameter, "alpha must lie in (0, 2)");
        const auto k = make_fractional(1, alpha).scaled(2.0);
        const double h = std::min(opts.h0, 2.0 - alpha);
        auto space = std::make_shared<const DiscreteSpace>(build_mesh(dom, k, h, opts.r_trunc));
        AssembleOptions ao;
        ao.threads = opts.threads;
        const auto sys = assemble(space, k, ao);
        const Vector G = load_normal_derivative(sys, phi, dphi);
        const Vector F = load_interior(*space, f);
        const auto sol = solve_neumann(sys, F + G);

        SweepRow row;
        row.alpha = alpha;
        row.h = h;
        row.r_trunc = opts.r_trunc;
        row.dofs = sys.size();
        row.defect = sol.compatibility_defect;
        double err = 0.0;
        for (int e : space->mesh.interior_elements()) {
            const auto& el = space->mesh.elements[e];
            err += integrate::gauss(
                [&](double x) {
                    const double d = space->evaluate(sol.u, x) - local.u(x);
                    return d * d;
                },
                el.left, el.right);
        }
        row.l2_error = std::sqrt(err);
        const Vector vh = space->interpolate(v);
        row.energy_gap = std::abs(vh.dot(sys.A * sol.u) - local_pairing);
        const double lhs = vh.dot(sys.A * sol.u);
        const double rhs = vh.dot(sys.P * sol.u) + vh.dot(sys.N_op * sol.u);
        row.gauss_green_residual = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
        row.boundary_term = G.sum();
        row.boundary_gap = std::abs(row.boundary_term - boundary_exact);
        row.pairing_bound = std::abs(G.dot(vh)) / std::max(v_norm(sys, vh), 1e-300);
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace nlcvp
