#pragma once

// Neumann, Dirichlet and Robin solves, spectra, the Dirichlet-to-Neumann map
// and the trace quotient norm.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcvp/assembly.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

struct SolveReport {
    Vector u;
    double compatibility_defect = 0.0;
    bool defect_corrected = false;
    double multiplier = 0.0;      // Lagrange multiplier of the mean constraint
    double energy = 0.0;          // E_h(u, u)
    double mean_over_omega = 0.0;
    double residual = 0.0;        // relative residual of the linear system
    double constraint_residual = 0.0;
    int iterations = 0;           // 0 for direct solves
    std::string method;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Neumann problem in the mean-zero space from assembled load vectors
/// (b = F + G). The bordered system always has a solution; an incompatible
/// load is projected and the defect reported.
SolveReport solve_neumann(const AssembledSystem& sys, const Vector& b);
SolveReport solve_neumann(const AssembledSystem& sys, const Field& f, const Field& g);
/// Neumann problem with data g * nu-tilde on the complement.
SolveReport solve_neumann_weighted(const AssembledSystem& sys, const Field& f, const Field& g);

/// Dirichlet problem with complement values g_c (ordered as space.complement).
SolveReport solve_dirichlet(const AssembledSystem& sys, const Vector& F, const Vector& g_c);
SolveReport solve_dirichlet(const AssembledSystem& sys, const Field& f, const Field& g);

/// Robin problem (A + M_beta) u = F + G.
SolveReport solve_robin(const AssembledSystem& sys, const Vector& b, const Matrix& M_beta);
SolveReport solve_robin(const AssembledSystem& sys, const Field& f, const Field& g, const Field& beta);

enum class EigVariant { neumann, dirichlet, robin };

struct EigenPairs {
    Vector values;   // nondecreasing
    Matrix vectors;  // columns on all DOFs, M-orthonormal on Omega
    double max_residual = 0.0;  // max ||K u - mu M u|| on the reduced problem
};

/// Generalised eigenproblem; Neumann and Robin eliminate the complement by a
/// Schur complement, Dirichlet restricts to interior and interface DOFs.
EigenPairs eig(const AssembledSystem& sys, EigVariant variant, int count,
               const Matrix* M_beta = nullptr);

struct PoincareReport {
    double constant = 0.0;  // 1 / mu_1
    double mu1 = 0.0;
    double min_slack = 0.0;  // min over probes of C E(u,u) - ||u - mean||^2, relative
    int probes = 0;
};

PoincareReport poincare_constant(const AssembledSystem& sys, unsigned seed = 1, int probes = 100);

/// Schur complement of (A - lambda M) onto the complement DOFs.
Matrix dtn_assemble(const AssembledSystem& sys, double lambda);

/// Harmonic extension u_g of complement data for (A - lambda M).
Vector dtn_extension(const AssembledSystem& sys, double lambda, const Vector& g_c);

struct DtnSpectralReport {
    double gamma1 = 0.0;
    double sigma_min = 0.0;
    double norm_D = 0.0;
    bool pass = false;
    bool inconclusive = false;
    double nearest_dirichlet = 0.0;
    int robin_multiplicity = 0;
    int kernel_dimension = 0;

    nlohmann::json to_json() const;
};

DtnSpectralReport dtn_spectral_check(const AssembledSystem& sys, const Field& beta);

/// Trace DOF order used by the quotient norm: space.trace().
double trace_quotient_norm(const AssembledSystem& sys, const Vector& v_trace);

/// Discrete V-norm: sqrt(u' M u + u' S u).
double v_norm(const AssembledSystem& sys, const Vector& u);

struct ProbeRung {
    double h = 0.0;
    double r_trunc = 0.0;
    int dofs = 0;
    double norm = 0.0;
    double defect = 0.0;
};

struct ProbeReport {
    double alpha = 0.0;
    double gamma = 0.0;
    std::vector<ProbeRung> rungs;
    std::string verdict;  // "bounded" or "divergent"
    std::string expected; // from the admissible / non-existence bands

    nlohmann::json to_json() const;
};

struct ProbeOptions {
    std::vector<double> h{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::vector<double> r_trunc{4.0, 64.0, 1024.0, 16384.0};
    int threads = 1;
};

/// Weighted Neumann problem on (-1, 1) with data g_gamma(y) = sign(y)(|y|-1)^gamma
/// along a ladder of meshes and truncation radii.
ProbeReport nonexistence_probe(double alpha, double gamma, const ProbeOptions& opts = {});

}  // namespace nlcvp
