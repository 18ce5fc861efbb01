#include "nlcvp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "nlcvp/error.hpp"

namespace nlcvp {

namespace {

constexpr int direct_limit = 3000;

Matrix sub(const Matrix& A, const std::vector<int>& r, const std::vector<int>& c) {
    Matrix out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = A(r[i], c[j]);
    return out;
}

Vector sub(const Vector& v, const std::vector<int>& r) {
    Vector out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = v[r[i]];
    return out;
}

void scatter(Vector& dst, const std::vector<int>& r, const Vector& src) {
    for (std::size_t i = 0; i < r.size(); ++i) dst[r[i]] = src[i];
}

double omega_measure(const AssembledSystem& sys) { return sys.space->mesh.domain.measure(); }

Matrix spd_solve(const Matrix& K, const Matrix& B, const char* what) {
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::solver_failure, std::string(what) + ": matrix is not positive definite");
    return llt.solve(B);
}

void check_null_space(const AssembledSystem& sys) {
    const Vector ones = Vector::Ones(sys.size());
    const double scale = std::max(sys.A.cwiseAbs().maxCoeff(), 1e-300);
    const double r = (sys.A * ones).cwiseAbs().maxCoeff();
    if (r > 1e-8 * scale * sys.size())
        throw Error(ErrorCode::assembly_inconsistency,
                    "stiffness does not annihilate constants (|A1| = " + std::to_string(r) + ")");
}

void fill_common(SolveReport& rep, const AssembledSystem& sys) {
    rep.energy = rep.u.dot(sys.A * rep.u);
    rep.mean_over_omega = (sys.M * rep.u).sum() / omega_measure(sys);
}

}  // namespace

nlohmann::json SolveReport::to_json() const {
    nlohmann::json j;
    j["coefficients"] = std::vector<double>(u.data(), u.data() + u.size());
    j["compatibility_defect"] = compatibility_defect;
    j["defect_corrected"] = defect_corrected;
    j["multiplier"] = multiplier;
    j["energy"] = energy;
    j["mean_over_omega"] = mean_over_omega;
    j["residual"] = residual;
    j["constraint_residual"] = constraint_residual;
    j["iterations"] = iterations;
    j["method"] = method;
    j["extra"] = extra;
    return j;
}

// ---------------------------------------------------------------------------
// Neumann

SolveReport solve_neumann(const AssembledSystem& sys, const Vector& b) {
    const int n = sys.size();
    if (b.size() != n) throw Error(ErrorCode::invalid_parameter, "load vector has the wrong size");
    check_null_space(sys);

    // Bordered system [[A, m], [m', 0]] [u; lam] = [b; 0]. Testing the first row
    // with the constant vector gives lam = (1'b) / |Omega|, so the system is
    // equivalent to the SPD problem (A + m m') u = b - lam m with m'u = 0.
    const Vector m = sys.M * Vector::Ones(n);
    const double measure = m.sum();
    SolveReport rep;
    rep.compatibility_defect = b.sum();
    rep.multiplier = rep.compatibility_defect / measure;
    rep.defect_corrected = std::abs(rep.compatibility_defect) > 1e-10;
    const Vector rhs = b - rep.multiplier * m;
    const Matrix K = sys.A + m * m.transpose();

    if (n <= direct_limit) {
        Eigen::LLT<Matrix> llt(K);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::assembly_inconsistency,
                        "Neumann system is singular beyond the constants");
        rep.u = llt.solve(rhs);
        rep.method = "bordered-direct";
    } else {
        Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(1e-13);
        cg.setMaxIterations(10 * n);
        cg.compute(K);
        rep.u = cg.solve(rhs);
        rep.iterations = static_cast<int>(cg.iterations());
        if (cg.info() != Eigen::Success)
            throw Error(ErrorCode::solver_failure, "CG did not converge on the Neumann system");
        rep.method = "bordered-cg";
    }
    const double bn = std::max(rhs.norm(), 1e-300);
    rep.residual = (sys.A * rep.u + rep.multiplier * m - b).norm() / std::max(b.norm(), bn);
    rep.constraint_residual = std::abs(m.dot(rep.u));
    fill_common(rep, sys);
    return rep;
}

SolveReport solve_neumann(const AssembledSystem& sys, const Field& f, const Field& g) {
    const Vector b = load_interior(*sys.space, f) + load_complement(*sys.space, g);
    return solve_neumann(sys, b);
}

SolveReport solve_neumann_weighted(const AssembledSystem& sys, const Field& f, const Field& g) {
    const Vector G = load_complement(*sys.space, g, sys.nu_tilde.get());
    auto rep = solve_neumann(sys, load_interior(*sys.space, f) + G);
    // discrete g in L^2(nu-tilde): the load is G itself against M_tilde
    Eigen::LDLT<Matrix> ldlt(sub(sys.M_tilde, sys.space->complement, sys.space->complement));
    const Vector Gc = sub(G, sys.space->complement);
    const double gnorm2 = Gc.dot(ldlt.solve(Gc));
    rep.extra["weighted_data_norm"] = std::sqrt(std::max(gnorm2, 0.0));
    return rep;
}

// ---------------------------------------------------------------------------
// Dirichlet

SolveReport solve_dirichlet(const AssembledSystem& sys, const Vector& F, const Vector& g_c) {
    const auto& sp = *sys.space;
    const auto U = sp.closure();
    const auto& C = sp.complement;
    if (g_c.size() != static_cast<Eigen::Index>(C.size()))
        throw Error(ErrorCode::invalid_parameter, "Dirichlet data has the wrong size");
    const Matrix A_UU = sub(sys.A, U, U);
    const Vector rhs = sub(F, U) - sub(sys.A, U, C) * g_c;
    SolveReport rep;
    const Vector uU = spd_solve(A_UU, rhs, "Dirichlet");
    rep.u = Vector::Zero(sp.size());
    scatter(rep.u, U, uU);
    scatter(rep.u, C, g_c);
    rep.residual = (A_UU * uU - rhs).norm() / std::max(rhs.norm(), 1e-300);
    rep.method = "cholesky";
    fill_common(rep, sys);

    // discrete maximum principle, recorded rather than asserted
    if (g_c.size() > 0) {
        const double lo = g_c.minCoeff(), hi = g_c.maxCoeff();
        double worst = 0.0;
        int count = 0;
        for (int i : sp.interior) {
            const double v = std::max(lo - rep.u[i], rep.u[i] - hi);
            if (v > 1e-12 * std::max(1.0, hi - lo)) {
                ++count;
                worst = std::max(worst, v);
            }
        }
        rep.extra["max_principle_violations"] = count;
        rep.extra["max_principle_worst"] = worst;
    }
    return rep;
}

SolveReport solve_dirichlet(const AssembledSystem& sys, const Field& f, const Field& g) {
    const Vector all = sys.space->interpolate(g);
    return solve_dirichlet(sys, load_interior(*sys.space, f), sub(all, sys.space->complement));
}

// ---------------------------------------------------------------------------
// Robin

SolveReport solve_robin(const AssembledSystem& sys, const Vector& b, const Matrix& M_beta) {
    if (M_beta.cwiseAbs().maxCoeff() == 0.0)
        throw Error(ErrorCode::degenerate_robin, "beta vanishes on the complement; use solve_neumann");
    SolveReport rep;
    const Matrix K = sys.A + M_beta;
    rep.u = spd_solve(K, b, "Robin");
    rep.residual = (K * rep.u - b).norm() / std::max(b.norm(), 1e-300);
    rep.compatibility_defect = b.sum();
    rep.method = "cholesky";
    fill_common(rep, sys);
    return rep;
}

SolveReport solve_robin(const AssembledSystem& sys, const Field& f, const Field& g, const Field& beta) {
    const auto& sp = *sys.space;
    // beta / nu-tilde must stay bounded on the collar samples
    double ratio = 0.0;
    for (int i : sp.complement) {
        if (i == sp.far_dof) continue;
        const double y = sp.mesh.vertices[i];
        ratio = std::max(ratio, beta(y) / (*sys.nu_tilde)(point1d(y)));
    }
    const Matrix Mb = beta_mass(sp, beta);
    auto rep = solve_robin(sys, load_interior(sp, f) + load_complement(sp, g), Mb);
    rep.extra["beta_over_nu_tilde_max"] = ratio;
    return rep;
}

// ---------------------------------------------------------------------------
// spectra

EigenPairs eig(const AssembledSystem& sys, EigVariant variant, int count, const Matrix* M_beta) {
    const auto& sp = *sys.space;
    const auto U = sp.closure();
    const auto& C = sp.complement;
    if (count <= 0 || count > static_cast<int>(U.size()))
        throw Error(ErrorCode::budget_exceeded, "eigenpair count exceeds the closure DOFs");
    Matrix K = sys.A;
    if (variant == EigVariant::robin) {
        if (!M_beta) throw Error(ErrorCode::invalid_parameter, "Robin spectrum needs a beta mass");
        if (M_beta->cwiseAbs().maxCoeff() == 0.0)
            throw Error(ErrorCode::degenerate_robin, "beta vanishes on the complement");
        K += *M_beta;
    }
    const Matrix K_UU = sub(K, U, U);
    const Matrix M_UU = sub(sys.M, U, U);
    Matrix red = K_UU;
    Matrix ext;  // u_C = ext * u_U
    if (variant != EigVariant::dirichlet && !C.empty()) {
        const Matrix K_CU = sub(K, C, U);
        ext = -spd_solve(sub(K, C, C), K_CU, "complement block");
        red = K_UU + K_CU.transpose() * ext;
        red = 0.5 * (red + red.transpose()).eval();
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(red, M_UU);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::solver_failure, "generalized eigensolver did not converge");

    EigenPairs out;
    out.values = es.eigenvalues().head(count);
    out.vectors = Matrix::Zero(sp.size(), count);
    for (int k = 0; k < count; ++k) {
        const Vector uU = es.eigenvectors().col(k);
        const double r = (red * uU - out.values[k] * (M_UU * uU)).norm() /
                         std::max(1.0, std::abs(out.values[k]));
        out.max_residual = std::max(out.max_residual, r);
        Vector full = Vector::Zero(sp.size());
        scatter(full, U, uU);
        if (ext.size()) scatter(full, C, ext * uU);
        out.vectors.col(k) = full;
    }
    return out;
}

PoincareReport poincare_constant(const AssembledSystem& sys, unsigned seed, int probes) {
    const auto pairs = eig(sys, EigVariant::neumann, 2, nullptr);
    PoincareReport rep;
    rep.mu1 = pairs.values[1];
    if (!(rep.mu1 > 0.0)) throw Error(ErrorCode::assembly_inconsistency, "second Neumann eigenvalue is not positive");
    rep.constant = 1.0 / rep.mu1;
    rep.probes = probes;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int n = sys.size();
    const double measure = omega_measure(sys);
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (int p = 0; p < probes; ++p) {
        Vector u(n);
        for (int i = 0; i < n; ++i) u[i] = nd(rng);
        const double mean = (sys.M * u).sum() / measure;
        const Vector w = u - mean * Vector::Ones(n);
        const double l2 = w.dot(sys.M * w);
        const double e = u.dot(sys.A * u);
        rep.min_slack = std::min(rep.min_slack, (rep.constant * e - l2) / std::max(l2, 1e-300));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Dirichlet-to-Neumann

namespace {

struct DtnParts {
    Matrix D;
    Matrix ext;  // u_U = ext * g_C
};

DtnParts dtn_parts(const AssembledSystem& sys, double lambda) {
    const auto& sp = *sys.space;
    const auto U = sp.closure();
    const auto& C = sp.complement;
    const Matrix K = sys.A - lambda * sys.M;
    const Matrix K_UU = sub(K, U, U);
    const Matrix K_UC = sub(K, U, C);
    // K_UU is indefinite for shifts above the first Dirichlet eigenvalue
    Eigen::PartialPivLU<Matrix> lu(K_UU);
    DtnParts out;
    out.ext = -lu.solve(K_UC);
    out.D = sub(K, C, C) + K_UC.transpose() * out.ext;
    out.D = 0.5 * (out.D + out.D.transpose()).eval();
    return out;
}

Vector dirichlet_spectrum(const AssembledSystem& sys) {
    const auto U = sys.space->closure();
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sub(sys.A, U, U), sub(sys.M, U, U),
                                                       Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double nearest(const Vector& values, double x) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (std::abs(values[i] - x) < std::abs(best - x)) best = values[i];
    return best;
}

constexpr double shift_guard = 1e-6;

}  // namespace

Matrix dtn_assemble(const AssembledSystem& sys, double lambda) {
    const Vector spec = dirichlet_spectrum(sys);
    const double near = nearest(spec, lambda);
    if (std::abs(near - lambda) <= shift_guard * std::max(1.0, std::abs(near)))
        throw Error(ErrorCode::shift_rejected,
                    "shift is within the guard band of the Dirichlet eigenvalue " + std::to_string(near));
    return dtn_parts(sys, lambda).D;
}

Vector dtn_extension(const AssembledSystem& sys, double lambda, const Vector& g_c) {
    const auto& sp = *sys.space;
    const auto parts = dtn_parts(sys, lambda);
    Vector u = Vector::Zero(sp.size());
    scatter(u, sp.closure(), parts.ext * g_c);
    scatter(u, sp.complement, g_c);
    return u;
}

nlohmann::json DtnSpectralReport::to_json() const {
    return {{"gamma1", gamma1},
            {"sigma_min", sigma_min},
            {"norm_D", norm_D},
            {"pass", pass},
            {"inconclusive", inconclusive},
            {"nearest_dirichlet", nearest_dirichlet},
            {"robin_multiplicity", robin_multiplicity},
            {"kernel_dimension", kernel_dimension}};
}

DtnSpectralReport dtn_spectral_check(const AssembledSystem& sys, const Field& beta) {
    const auto& sp = *sys.space;
    const Matrix Mb = beta_mass(sp, beta);
    const int nU = static_cast<int>(sp.closure().size());
    const auto robin = eig(sys, EigVariant::robin, std::min(nU, 4), &Mb);

    DtnSpectralReport rep;
    rep.gamma1 = robin.values[0];
    for (Eigen::Index i = 0; i < robin.values.size(); ++i)
        if (std::abs(robin.values[i] - rep.gamma1) <= 1e-8 * std::max(1.0, rep.gamma1)) ++rep.robin_multiplicity;

    rep.nearest_dirichlet = nearest(dirichlet_spectrum(sys), rep.gamma1);
    if (std::abs(rep.nearest_dirichlet - rep.gamma1) <= shift_guard * std::max(1.0, rep.gamma1)) {
        rep.inconclusive = true;
        return rep;
    }
    const Matrix D = dtn_parts(sys, rep.gamma1).D;
    const Matrix T = D + sub(Mb, sp.complement, sp.complement);
    Eigen::JacobiSVD<Matrix> svdD(D);
    Eigen::JacobiSVD<Matrix> svdT(T);
    rep.norm_D = svdD.singularValues()[0];
    const auto& s = svdT.singularValues();
    rep.sigma_min = s[s.size() - 1];
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] < 1e-6 * rep.norm_D) ++rep.kernel_dimension;
    rep.pass = rep.sigma_min < 1e-6 * rep.norm_D;
    return rep;
}

// ---------------------------------------------------------------------------
// trace norms

double v_norm(const AssembledSystem& sys, const Vector& u) {
    return std::sqrt(std::max(0.0, u.dot((sys.M + sys.seminorm()) * u)));
}

double trace_quotient_norm(const AssembledSystem& sys, const Vector& v_trace) {
    const auto& sp = *sys.space;
    const auto T = sp.trace();
    const auto& I = sp.interior;
    if (v_trace.size() != static_cast<Eigen::Index>(T.size()))
        throw Error(ErrorCode::invalid_parameter, "trace vector has the wrong size");
    const Matrix Q = sys.M + sys.seminorm();
    double val = v_trace.dot(sub(Q, T, T) * v_trace);
    if (!I.empty()) {
        const Vector q = sub(Q, I, T) * v_trace;
        const Vector z = spd_solve(sub(Q, I, I), q, "quotient norm");
        val -= q.dot(z);
    }
    return std::sqrt(std::max(val, 0.0));
}

// ---------------------------------------------------------------------------
// non-existence probe

nlohmann::json ProbeReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rungs)
        rows.push_back({{"h", r.h}, {"r_trunc", r.r_trunc}, {"dofs", r.dofs}, {"norm", r.norm}, {"defect", r.defect}});
    return {{"alpha", alpha}, {"gamma", gamma}, {"rungs", rows}, {"verdict", verdict}, {"expected", expected}};
}

ProbeReport nonexistence_probe(double alpha, double gamma, const ProbeOptions& opts) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::invalid_parameter, "alpha must lie in (0, 2)");
    if (!(gamma > -1.0 && gamma < alpha))
        throw Error(ErrorCode::data_not_integrable, "gamma must lie in (-1, alpha)");
    if (opts.h.size() != opts.r_trunc.size() || opts.h.empty())
        throw Error(ErrorCode::invalid_parameter, "ladder h and r_trunc must have equal nonzero length");

    ProbeReport rep;
    rep.alpha = alpha;
    rep.gamma = gamma;
    if (gamma > (alpha - 1) / 2 && gamma < alpha / 2)
        rep.expected = "bounded";
    else if ((gamma > alpha / 2 && gamma < (alpha + 1) / 2) || gamma < -(alpha + 1) / 2)
        rep.expected = "divergent";
    else
        rep.expected = "unclassified";

    const auto kernel = make_fractional(1, alpha);
    const auto dom = DomainSpec::interval(-1.0, 1.0);
    const Field g = [gamma](double y) {
        const double r = std::abs(y);
        if (r <= 1.0) return 0.0;
        return (y > 0 ? 1.0 : -1.0) * std::pow(r - 1.0, gamma);
    };
    const Field zero = [](double) { return 0.0; };
    for (std::size_t i = 0; i < opts.h.size(); ++i) {
        auto space = std::make_shared<const DiscreteSpace>(build_mesh(dom, kernel, opts.h[i], opts.r_trunc[i]));
        AssembleOptions ao;
        ao.threads = opts.threads;
        const auto sys = assemble(space, kernel, ao);
        const auto sol = solve_neumann_weighted(sys, zero, g);
        rep.rungs.push_back({opts.h[i], opts.r_trunc[i], sys.size(), v_norm(sys, sol.u), sol.compatibility_defect});
    }

    bool growing = rep.rungs.size() >= 2;
    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
        growing = growing && rep.rungs[i].norm > 1.5 * rep.rungs[i - 1].norm;
    bool settled = false;
    if (rep.rungs.size() >= 2) {
        const double a = rep.rungs[rep.rungs.size() - 2].norm, b = rep.rungs.back().norm;
        settled = std::abs(b - a) < 0.1 * std::max(a, b);
    }
    rep.verdict = growing ? "divergent" : (settled ? "bounded" : "inconclusive");
    return rep;
}

}  // namespace nlcvp
