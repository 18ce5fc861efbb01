#include "nlcvp/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "nlcvp/error.hpp"
#include "nlcvp/integrate.hpp"
#include "nlcvp/quadrature.hpp"

namespace nlcvp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double hat_on(const Element& e, int node, double x) {
    const double t = (x - e.left) / e.size();
    if (node == e.nodes[0]) return 1.0 - t;
    if (node == e.nodes[1]) return t;
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteSpace

DiscreteSpace::DiscreteSpace(DomainMesh m) : mesh(std::move(m)) {
    num_nodes = static_cast<int>(mesh.vertices.size());
    const double a = mesh.a();
    const double b = mesh.b();
    for (int i = 0; i < num_nodes; ++i) {
        const double x = mesh.vertices[i];
        if (x > a && x < b) {
            kind.push_back(DofKind::interior);
            interior.push_back(i);
        } else if (x == a || x == b) {
            kind.push_back(DofKind::interface);
            interface.push_back(i);
        } else {
            kind.push_back(DofKind::complement);
            complement.push_back(i);
        }
    }
    if (mesh.far_field) {
        far_dof = num_nodes;
        kind.push_back(DofKind::complement);
        complement.push_back(far_dof);
    }
}

std::vector<int> DiscreteSpace::closure() const {
    std::vector<int> out = interior;
    out.insert(out.end(), interface.begin(), interface.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> DiscreteSpace::trace() const {
    std::vector<int> out = interface;
    out.insert(out.end(), complement.begin(), complement.end());
    std::sort(out.begin(), out.end());
    return out;
}

Vector DiscreteSpace::interpolate(const Field& u) const {
    Vector v(size());
    for (int i = 0; i < num_nodes; ++i) v[i] = u(mesh.vertices[i]);
    if (far_dof >= 0) v[far_dof] = 0.5 * (u(-mesh.r_trunc) + u(mesh.r_trunc));
    return v;
}

double DiscreteSpace::evaluate(const Vector& coeffs, double x) const {
    const auto& v = mesh.vertices;
    if (x < v.front() || x > v.back()) return far_dof >= 0 ? coeffs[far_dof] : 0.0;
    auto it = std::upper_bound(v.begin(), v.end(), x);
    std::size_t i = (it == v.begin()) ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
    if (i + 1 >= v.size()) return coeffs[v.size() - 1];
    const double t = (x - v[i]) / (v[i + 1] - v[i]);
    return (1.0 - t) * coeffs[i] + t * coeffs[i + 1];
}

// ---------------------------------------------------------------------------
// masses and loads

Matrix interior_mass(const DiscreteSpace& space) {
    Matrix M = Matrix::Zero(space.size(), space.size());
    for (int e : space.mesh.interior_elements()) {
        const auto& el = space.mesh.elements[e];
        const double h = el.size();
        const int i = el.nodes[0], j = el.nodes[1];
        M(i, i) += h / 3.0;
        M(j, j) += h / 3.0;
        M(i, j) += h / 6.0;
        M(j, i) += h / 6.0;
    }
    return M;
}

namespace {

// int_s^inf min(1, nu(r)) dr
double tail_min_one(const KernelSpec& k, double s) {
    std::vector<double> extra;
    if (auto c = unit_crossing(k)) extra.push_back(*c);
    return radial_integral(k, [&](double r) { return std::min(1.0, k(r)); }, s, inf, 0.0, extra);
}

}  // namespace

Matrix weighted_complement_mass(const DiscreteSpace& space, const WeightField& w) {
    const int n = space.size();
    Matrix Mt = Matrix::Zero(n, n);
    // nu-tilde has kinks where |y - end of B| crosses a kernel radius
    std::vector<double> kinks;
    {
        std::vector<double> radii = w.kernel().breakpoints();
        if (auto c = unit_crossing(w.kernel())) radii.push_back(*c);
        const double lo = w.base().center[0] - w.base().radius, hi = w.base().center[0] + w.base().radius;
        for (double r : radii)
            for (double e : {lo, hi}) {
                kinks.push_back(e - r);
                kinks.push_back(e + r);
            }
    }
    for (int e : space.mesh.collar_elements()) {
        const auto& el = space.mesh.elements[e];
        std::vector<double> cuts{el.left, el.right};
        for (double c : kinks)
            if (c > el.left && c < el.right) cuts.push_back(c);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            integrate::gauss_visit(cuts[i], cuts[i + 1], [&](double y, double wt) {
                const double nt = w(point1d(y));
                for (int a : el.nodes)
                    for (int b : el.nodes) Mt(a, b) += wt * nt * hat_on(el, a, y) * hat_on(el, b, y);
            });
        }
    }
    if (space.far_dof >= 0) {
        // int_{|y|>R} nu~(y) dy = int_B [T(R - z) + T(R + z)] dz
        const double R = space.mesh.r_trunc;
        const Ball& B = w.base();
        const KernelSpec& k = w.kernel();
        const double lo = B.center[0] - B.radius, hi = B.center[0] + B.radius;
        double far = 0.0;
        integrate::gauss_visit(lo, hi, [&](double z, double wt) {
            far += wt * (tail_min_one(k, R - z) + tail_min_one(k, R + z));
        });
        Mt(space.far_dof, space.far_dof) = far;
    }
    return Mt;
}

Vector load_interior(const DiscreteSpace& space, const Field& f) {
    Vector F = Vector::Zero(space.size());
    for (int e : space.mesh.interior_elements()) {
        const auto& el = space.mesh.elements[e];
        integrate::gauss_visit(el.left, el.right, [&](double x, double w) {
            const double fx = f(x);
            for (int a : el.nodes) F[a] += w * fx * hat_on(el, a, x);
        });
    }
    return F;
}

Vector load_complement(const DiscreteSpace& space, const Field& g, const WeightField* weight) {
    Vector G = Vector::Zero(space.size());
    auto data = [&](double y) {
        const double v = g(y);
        return weight ? v * (*weight)(point1d(y)) : v;
    };
    for (int e : space.mesh.collar_elements()) {
        const auto& el = space.mesh.elements[e];
        for (int a : el.nodes) {
            auto est = integrate::tanh_sinh([&](double y) { return data(y) * hat_on(el, a, y); }, el.left,
                                            el.right, 1e-12);
            if (!std::isfinite(est.value))
                throw Error(ErrorCode::data_not_integrable, "complement data is not integrable on the collar");
            G[a] += est.value;
        }
    }
    if (space.far_dof >= 0) {
        const double R = space.mesh.r_trunc;
        auto right = integrate::exp_sinh([&](double t) { return data(t); }, R, 1e-12);
        auto left = integrate::exp_sinh([&](double t) { return data(-t); }, R, 1e-12);
        if (!std::isfinite(right.value) || !std::isfinite(left.value) ||
            right.error > 1e-6 * std::max(right.l1, 1e-300) + 1e-300 ||
            left.error > 1e-6 * std::max(left.l1, 1e-300) + 1e-300)
            throw Error(ErrorCode::data_not_integrable, "complement data is not integrable (or not resolved) beyond R_trunc");
        G[space.far_dof] = right.value + left.value;
    }
    return G;
}

Matrix beta_mass(const DiscreteSpace& space, const Field& beta) {
    const int n = space.size();
    Matrix Mb = Matrix::Zero(n, n);
    auto check = [](double b) {
        if (!(b >= 0.0)) throw Error(ErrorCode::invalid_parameter, "Robin coefficient must be nonnegative");
        return b;
    };
    // only complement rows: interface nodes are unknowns of the Dirichlet problem
    std::vector<char> in_c(n, 0);
    for (int i : space.complement) in_c[i] = 1;
    for (int e : space.mesh.collar_elements()) {
        const auto& el = space.mesh.elements[e];
        integrate::gauss_visit(el.left, el.right, [&](double y, double w) {
            const double b = check(beta(y));
            for (int a : el.nodes)
                for (int c : el.nodes)
                    if (in_c[a] && in_c[c]) Mb(a, c) += w * b * hat_on(el, a, y) * hat_on(el, c, y);
        });
    }
    if (space.far_dof >= 0) {
        const auto& m = space.mesh;
        const double R = m.r_trunc;
        const double lo = m.collar_lo, hi = m.collar_hi;
        // int over the unit shell next to B_R, used when beta is not integrable
        double shell = 0.0;
        integrate::gauss_visit(lo - 1.0, lo, [&](double y, double w) { shell += w * check(beta(y)); });
        integrate::gauss_visit(hi, hi + 1.0, [&](double y, double w) { shell += w * check(beta(y)); });
        const double far_y = 1e12 * std::max(R, 1.0);
        const double tail = far_y * (check(beta(-far_y)) + check(beta(far_y)));
        double far = shell;
        if (tail <= 1e-8 * std::max(shell, 1e-300)) {
            const auto right = integrate::exp_sinh([&](double s) { return check(beta(hi + s)); }, 0.0);
            const auto left = integrate::exp_sinh([&](double s) { return check(beta(lo - s)); }, 0.0);
            far = right.value + left.value;
        }
        Mb(space.far_dof, space.far_dof) += far;
    }
    return Mb;
}

// ---------------------------------------------------------------------------
// stiffness and N operator

namespace {

struct PairTask {
    int e1, e2;
    double weight;
    bool cross;
};

struct LocalResult {
    std::vector<int> dofs;
    Matrix K;   // symmetric form contribution
    Matrix Pc;  // interior pairing (row = test dof)
    Matrix Nn;  // N operator (row = test dof)
};

LocalResult compute_pair(const DomainMesh& mesh, const PairTask& t, const KernelSpec& k,
                         const QuadRule& rule) {
    const Element& E1 = mesh.elements[t.e1];
    const Element& E2 = mesh.elements[t.e2];
    LocalResult r;
    for (int n : {E1.nodes[0], E1.nodes[1], E2.nodes[0], E2.nodes[1]})
        if (std::find(r.dofs.begin(), r.dofs.end(), n) == r.dofs.end()) r.dofs.push_back(n);
    const int nd = static_cast<int>(r.dofs.size());
    r.K = Matrix::Zero(nd, nd);
    if (t.cross) {
        r.Pc = Matrix::Zero(nd, nd);
        r.Nn = Matrix::Zero(nd, nd);
    }
    PairIntegrator pi(E1, E2, k, rule);
    if (pi.empty()) return r;
    std::vector<LinearPair> phi(nd);
    std::vector<Affine> F(nd);
    for (int a = 0; a < nd; ++a) {
        const int n = r.dofs[a];
        phi[a].on_e1 = {n == E1.nodes[0] ? 1.0 : 0.0, n == E1.nodes[1] ? 1.0 : 0.0};
        phi[a].on_e2 = {n == E2.nodes[0] ? 1.0 : 0.0, n == E2.nodes[1] ? 1.0 : 0.0};
        F[a] = pi.difference(phi[a]);
    }
    for (int a = 0; a < nd; ++a) {
        for (int b = a; b < nd; ++b) {
            const double v = t.weight * pi.product(F[a], F[b]);
            r.K(a, b) = v;
            r.K(b, a) = v;
        }
    }
    if (t.cross) {
        for (int j = 0; j < nd; ++j) {
            const Affine X = pi.x_part(phi[j].on_e1);
            const Affine Y = pi.y_part(phi[j].on_e2);
            for (int i = 0; i < nd; ++i) {
                r.Pc(j, i) = pi.product(F[i], X);
                r.Nn(j, i) = -pi.product(F[i], Y);
            }
        }
    }
    return r;
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Stiffness {
    Matrix A_inner, A_cross, P, N;
};

Stiffness assemble_stiffness(const DiscreteSpace& space, const KernelSpec& k, const AssembleOptions& opts) {
    const DomainMesh& mesh = space.mesh;
    const int n = space.size();
    const auto inner = mesh.interior_elements();
    const auto outer = mesh.collar_elements();

    std::vector<PairTask> tasks;
    for (std::size_t i = 0; i < inner.size(); ++i)
        for (std::size_t j = i; j < inner.size(); ++j)
            tasks.push_back({inner[i], inner[j], i == j ? 0.5 : 1.0, false});
    for (int i : inner)
        for (int c : outer) tasks.push_back({i, c, 1.0, true});

    std::vector<LocalResult> results(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), opts.threads, [&](int t) {
        try {
            results[t] = compute_pair(mesh, tasks[t], k, opts.rule);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::quadrature_failure) throw;
            throw Error(ErrorCode::quadrature_failure,
                        std::string(e.what()) + " (element pair " + std::to_string(tasks[t].e1) + ", " +
                            std::to_string(tasks[t].e2) + ")");
        }
    });

    Stiffness s{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& r = results[t];
        const int nd = static_cast<int>(r.dofs.size());
        for (int a = 0; a < nd; ++a) {
            for (int b = 0; b < nd; ++b) {
                const int ga = r.dofs[a], gb = r.dofs[b];
                if (tasks[t].cross) {
                    s.A_cross(ga, gb) += r.K(a, b);
                    s.P(ga, gb) += r.Pc(a, b);
                    s.N(ga, gb) += r.Nn(a, b);
                } else {
                    s.A_inner(ga, gb) += r.K(a, b);
                    s.P(ga, gb) += r.K(a, b);
                }
            }
        }
    }

    // interior x far region: the far DOF is the constant function on |y| > R
    if (space.far_dof >= 0) {
        const int f = space.far_dof;
        const double R = mesh.r_trunc;
        for (int e : inner) {
            const auto& el = mesh.elements[e];
            const std::array<int, 3> dofs{el.nodes[0], el.nodes[1], f};
            integrate::gauss_visit(el.left, el.right, [&](double x, double wt) {
                const double w = wt * far_weight(k, x, R);
                const std::array<double, 3> F{hat_on(el, dofs[0], x), hat_on(el, dofs[1], x), -1.0};
                const std::array<double, 3> psi_x{F[0], F[1], 0.0};
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        s.A_cross(dofs[a], dofs[b]) += w * F[a] * F[b];
                        s.P(dofs[a], dofs[b]) += w * F[b] * psi_x[a];
                    }
                    s.N(f, dofs[a]) += -w * F[a];
                }
            });
        }
    }
    return s;
}

}  // namespace

AssembledSystem assemble(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k,
                         const AssembleOptions& opts) {
    opts.rule.validate();
    if (!space) throw Error(ErrorCode::invalid_parameter, "missing discrete space");
    if (k.dimension() != space->mesh.domain.dimension())
        throw Error(ErrorCode::invalid_parameter, "kernel and space dimensions differ");
    if (space->mesh.far_field != k.has_full_support())
        throw Error(ErrorCode::invalid_parameter, "mesh collar does not match the kernel support");

    AssembledSystem sys;
    sys.space = space;
    sys.kernel = std::make_shared<const KernelSpec>(k);
    auto s = assemble_stiffness(*space, k, opts);
    sys.A_inner = std::move(s.A_inner);
    sys.A_cross = std::move(s.A_cross);
    sys.P = std::move(s.P);
    sys.N_op = std::move(s.N);
    sys.A = sys.A_inner + sys.A_cross;
    sys.M = interior_mass(*space);

    const double a = space->mesh.a(), b = space->mesh.b();
    Ball base{point1d(0.5 * (a + b)), 0.5 * (b - a)};
    if (opts.weight_base) {
        if (!ball_inside(space->mesh.domain, *opts.weight_base))
            throw Error(ErrorCode::invalid_parameter, "weight base ball is not inside the domain");
        base = *opts.weight_base;
    }
    sys.nu_tilde = std::make_shared<const WeightField>(WeightKind::nu_tilde, k, base);
    sys.M_tilde = weighted_complement_mass(*space, *sys.nu_tilde);

    sys.meta = {{"kernel", k.to_json()},
                {"kernel_id", k.id()},
                {"quadrature", opts.rule.to_json()},
                {"r_trunc", space->mesh.r_trunc},
                {"far_field", space->mesh.far_field},
                {"h", space->mesh.h},
                {"dofs", space->size()},
                {"weight_base", {{"center", base.center[0]}, {"radius", base.radius}}}};
    return sys;
}

Matrix assemble_N(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k,
                  const AssembleOptions& opts) {
    opts.rule.validate();
    return assemble_stiffness(*space, k, opts).N;
}

// ---------------------------------------------------------------------------
// complement load of N phi

Vector load_normal_derivative(const AssembledSystem& sys, const Field& phi, const Field& dphi) {
    const DiscreteSpace& sp = *sys.space;
    const DomainMesh& mesh = sp.mesh;
    const KernelSpec& k = *sys.kernel;
    const double a = mesh.a(), b = mesh.b();
    // N of the tangent line at the nearer end carries the d^{1-alpha} part
    // near the boundary and is exact through N_op; the rest is bounded.
    const double pa = phi(a), sa = dphi(a), pb = phi(b), sb = dphi(b);
    const Field lineL = [=](double x) { return pa + sa * (x - a); };
    const Field lineR = [=](double x) { return pb + sb * (x - b); };
    const Field restL = [&](double x) { return phi(x) - lineL(x); };
    const Field restR = [&](double x) { return phi(x) - lineR(x); };
    Vector lL(sp.size()), lR(sp.size());
    for (int i = 0; i < sp.num_nodes; ++i) {
        lL[i] = lineL(mesh.vertices[i]);
        lR[i] = lineR(mesh.vertices[i]);
    }
    if (sp.far_dof >= 0) lL[sp.far_dof] = lR[sp.far_dof] = 0.0;  // N_op(collar, far) vanishes
    const Vector NL = sys.N_op * lL, NR = sys.N_op * lR;

    Vector G = Vector::Zero(sp.size());
    std::vector<char> done(sp.size(), 0);
    for (int e : mesh.collar_elements()) {
        const auto& el = mesh.elements[e];
        const bool left = el.right <= a;
        const Field& rest = left ? restL : restR;
        const double p = left ? a : b;
        auto visit = [&](double y, double w) {
            const double v = w * pointwise_N(k, rest, y, mesh.domain);
            for (int n : el.nodes) G[n] += v * hat_on(el, n, y);
        };
        const double dist = left ? p - el.right : el.left - p;
        if (dist == 0.0) {
            // geometric cells toward the boundary down to 1e-6 of the element
            if (left)
                integrate::graded_visit_right(el.left, el.right, 0.25, 10, visit);
            else
                integrate::graded_visit_left(el.left, el.right, 0.25, 10, visit);
        } else {
            integrate::distance_graded_visit(el.left, el.right, p, visit);
        }
        for (int n : el.nodes)
            if (!done[n]) {
                G[n] += left ? NL[n] : NR[n];
                done[n] = 1;
            }
    }
    if (sp.far_dof >= 0) {
        const double R = mesh.r_trunc;
        auto Nphi = [&](double y) { return pointwise_N(k, phi, y, mesh.domain); };
        auto right = integrate::exp_sinh(Nphi, R, 1e-12);
        auto leftp = integrate::exp_sinh([&](double t) { return Nphi(-t); }, R, 1e-12);
        G[sp.far_dof] = right.value + leftp.value;
    }
    return G;
}

// ---------------------------------------------------------------------------
// Douglas-type trace norm

namespace {

template <class Visit>
void visit_toward(double l, double r, double s, Visit&& visit) {
    if (s == l) integrate::graded_visit_left(l, r, 0.25, 30, visit);
    else if (s == r) integrate::graded_visit_right(l, r, 0.25, 30, visit);
    else integrate::distance_graded_visit(l, r, s, visit);
}

}  // namespace

Matrix assemble_trace_DK(const DiscreteSpace& space, const KernelSpec& k) {
    if (k.family() != KernelFamily::fractional)
        throw Error(ErrorCode::unsupported_family, "the trace norm is defined for fractional kernels");
    const DomainMesh& mesh = space.mesh;
    const double alpha = k.alpha();
    const double a = mesh.a(), b = mesh.b();
    const auto tr = space.trace();
    std::vector<int> local(space.size(), -1);
    for (std::size_t i = 0; i < tr.size(); ++i) local[tr[i]] = static_cast<int>(i);
    const int m = static_cast<int>(tr.size());
    Matrix T = Matrix::Zero(m, m);

    auto delta = [&](double x) { return x < a ? a - x : x - b; };
    auto kern = [&](double x, double y) {
        const double r = std::abs(x - y) + delta(x) + delta(y);
        return r > 0.0 ? std::pow(r, -1.0 - alpha) : 0.0;  // both points rounded onto the boundary
    };
    auto side_point = [&](const Element& e) { return e.right <= a ? a : b; };

    const auto collar = mesh.collar_elements();
    for (std::size_t i = 0; i < collar.size(); ++i) {
        for (std::size_t j = i; j < collar.size(); ++j) {
            const auto& E1 = mesh.elements[collar[i]];
            const auto& E2 = mesh.elements[collar[j]];
            const double weight = (i == j) ? 1.0 : 2.0;
            const bool same_side = side_point(E1) == side_point(E2);
            const double s = side_point(E1);
            std::vector<int> nodes;
            for (int n : {E1.nodes[0], E1.nodes[1], E2.nodes[0], E2.nodes[1]})
                if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
            const int nd = static_cast<int>(nodes.size());
            Matrix loc = Matrix::Zero(nd, nd);
            std::vector<double> F(nd);
            auto outer = [&](double x, double wx) {
                auto inner = [&](double y, double wy) {
                    const double w = wx * wy * kern(x, y);
                    for (int p = 0; p < nd; ++p) F[p] = hat_on(E1, nodes[p], x) - hat_on(E2, nodes[p], y);
                    for (int p = 0; p < nd; ++p)
                        for (int q = 0; q < nd; ++q) loc(p, q) += w * F[p] * F[q];
                };
                std::vector<double> cuts{E2.left, E2.right};
                if (x > E2.left && x < E2.right) cuts.insert(cuts.begin() + 1, x);
                for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                    if (same_side) visit_toward(cuts[c], cuts[c + 1], s, inner);
                    else integrate::gauss_visit(cuts[c], cuts[c + 1], inner);
                }
            };
            if (same_side) visit_toward(E1.left, E1.right, s, outer);
            else integrate::gauss_visit(E1.left, E1.right, outer);
            for (int p = 0; p < nd; ++p)
                for (int q = 0; q < nd; ++q) {
                    const int gp = local[nodes[p]], gq = local[nodes[q]];
                    if (gp >= 0 && gq >= 0) T(gp, gq) += weight * loc(p, q);
                }
        }
    }

    // collar x far region (both orderings) and the weighted mass
    const int f = space.far_dof >= 0 ? local[space.far_dof] : -1;
    const double R = mesh.r_trunc;
    for (int e : collar) {
        const auto& el = mesh.elements[e];
        integrate::gauss_visit(el.left, el.right, [&](double x, double wx) {
            const std::array<double, 2> psi{hat_on(el, el.nodes[0], x), hat_on(el, el.nodes[1], x)};
            const double mass = wx * std::pow(1.0 + std::abs(x), -1.0 - alpha);
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    const int gp = local[el.nodes[p]], gq = local[el.nodes[q]];
                    if (gp >= 0 && gq >= 0) T(gp, gq) += mass * psi[p] * psi[q];
                }
            if (f < 0) return;
            double W;
            if (x > b) W = std::pow(2.0 * R - 2.0 * b, -alpha) + std::pow(2.0 * x - b + a + 2.0 * R, -alpha);
            else W = std::pow(2.0 * a + 2.0 * R, -alpha) + std::pow(2.0 * R - 2.0 * x + a - b, -alpha);
            W *= 2.0 * wx / (2.0 * alpha);
            const std::array<int, 3> g{local[el.nodes[0]], local[el.nodes[1]], f};
            const std::array<double, 3> F{psi[0], psi[1], -1.0};
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                    if (g[p] >= 0 && g[q] >= 0) T(g[p], g[q]) += W * F[p] * F[q];
        });
    }
    if (f >= 0) T(f, f) += 2.0 * std::pow(1.0 + R, -alpha) / alpha;
    return T;
}

}  // namespace nlcvp
