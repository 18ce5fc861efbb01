#pragma once

// Discrete space of continuous piecewise-linear functions on Omega and its
// collar (plus a far-field constant) and the matrices acting on it.

#include <memory>
#include <vector>

#include <json.hpp>

#include "nlcvp/geometry.hpp"
#include "nlcvp/kernels.hpp"
#include "nlcvp/quadrature.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

enum class DofKind { interior, interface, complement };

struct DiscreteSpace {
    DomainMesh mesh;
    int num_nodes = 0;
    int far_dof = -1;              // index of the far-field DOF, or -1
    std::vector<DofKind> kind;     // per DOF
    std::vector<int> interior;
    std::vector<int> interface;
    std::vector<int> complement;   // collar nodes outside closure(Omega), then far

    explicit DiscreteSpace(DomainMesh m);

    int size() const { return static_cast<int>(kind.size()); }
    /// interior + interface DOFs (the unknowns of Dirichlet problems)
    std::vector<int> closure() const;
    /// interface + complement DOFs (trace of a function on the complement)
    std::vector<int> trace() const;
    /// nodal interpolant of u; the far DOF takes the average of u(-R), u(R)
    Vector interpolate(const Field& u) const;
    /// value of the discrete function at x (far DOF beyond the collar)
    double evaluate(const Vector& coeffs, double x) const;
};

struct AssembleOptions {
    QuadRule rule;
    int threads = 1;
    /// base ball of the nu-tilde weight; defaults to the ball spanned by Omega
    std::optional<Ball> weight_base;
};

struct AssembledSystem {
    std::shared_ptr<const DiscreteSpace> space;
    std::shared_ptr<const KernelSpec> kernel;
    std::shared_ptr<const WeightField> nu_tilde;

    Matrix A;        // form E over (Omega^c x Omega^c)^c
    Matrix A_inner;  // 1/2 int_{Omega x Omega}
    Matrix A_cross;  // int_{Omega x Omega^c}
    Matrix P;        // interior pairing: (P u) . v = int_Omega (L u) v, discretely
    Matrix N_op;     // (N_op u) . v = int_{Omega^c} (N u) v
    Matrix M;        // mass on Omega
    Matrix M_tilde;  // nu-tilde weighted mass on the complement
    nlohmann::json meta;

    /// Seminorm matrix 1/2 int_{Omega x R^d} (u(x) - u(y))^2 nu.
    Matrix seminorm() const { return A_inner + 0.5 * A_cross; }
    int size() const { return static_cast<int>(A.rows()); }
};

AssembledSystem assemble(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k,
                         const AssembleOptions& opts = {});

/// The N operator alone (identical to assemble(...).N_op).
Matrix assemble_N(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k,
                  const AssembleOptions& opts = {});

/// Gram matrix of the Douglas-type trace norm on the trace DOFs
/// (space.trace() order): int int (v(x)-v(y))^2 (|x-y| + d_x + d_y)^{-1-alpha}
/// over Omega^c x Omega^c plus int v^2 (1+|x|)^{-1-alpha} over Omega^c.
Matrix assemble_trace_DK(const DiscreteSpace& space, const KernelSpec& k);

/// int_Omega f psi_i.
Vector load_interior(const DiscreteSpace& space, const Field& f);
/// int_{Omega^c} g psi_i, optionally weighted by nu-tilde.
Vector load_complement(const DiscreteSpace& space, const Field& g,
                       const WeightField* weight = nullptr);
/// int_{Omega^c} psi_i N phi for smooth phi with derivative dphi. The part
/// of N phi that blows up at the boundary comes from the tangent lines of phi
/// at the ends and is applied through N_op. One-dimensional.
Vector load_normal_derivative(const AssembledSystem& sys, const Field& phi, const Field& dphi);
/// int_{Omega^c} beta psi_i psi_j on complement DOFs. The far DOF gets
/// int_{|y|>R} beta, or the unit-shell mass when beta is not integrable there.
Matrix beta_mass(const DiscreteSpace& space, const Field& beta);
/// nu-tilde weighted mass on the complement.
Matrix weighted_complement_mass(const DiscreteSpace& space, const WeightField& w);
/// P1 mass matrix on Omega.
Matrix interior_mass(const DiscreteSpace& space);

}  // namespace nlcvp
