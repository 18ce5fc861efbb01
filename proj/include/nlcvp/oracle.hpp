#pragma once

// Independent references: brute-force dense assembly, the classical Neumann
// solution on (0, 1) and the alpha -> 2 sweep.

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcvp/assembly.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

inline constexpr int oracle_dof_budget = 64;

/// Same matrices as assemble() by nested graded Gauss quadrature with no
/// shared near-diagonal code. Refuses spaces above the DOF budget.
AssembledSystem dense_reference(std::shared_ptr<const DiscreteSpace> space, const KernelSpec& k);

struct LocalSolution {
    Field u;   // mean-zero solution
    Field du;  // its derivative
};

/// -u'' = f on (0, 1) with outward normal derivatives -u'(0) = g_left and
/// u'(1) = g_right; the data must satisfy int f + g_left + g_right = 0.
LocalSolution local_reference_1d(const Field& f, double g_left, double g_right);

struct SweepRow {
    double alpha = 0.0;
    double h = 0.0;
    double r_trunc = 0.0;
    int dofs = 0;
    double l2_error = 0.0;
    double energy_gap = 0.0;
    double gauss_green_residual = 0.0;
    double boundary_term = 0.0;   // int_{Omega^c} N_alpha phi
    double boundary_gap = 0.0;    // |boundary_term - (phi'(1) - phi'(0))|
    double pairing_bound = 0.0;   // |int N_alpha phi v| / ||v|| for the fixed test v
    double defect = 0.0;
};

struct SweepOptions {
    std::vector<double> alphas{1.2, 1.5, 1.8, 1.95};
    double h0 = 0.125;
    double r_trunc = 4.0;
    int threads = 1;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double local_l2 = 0.0;  // ||u_loc||_{L^2(0,1)}
};

/// Neumann problems on (0, 1) for nu_alpha = 2 * fractional(alpha) with data
/// f = -phi'' and g_alpha = N_alpha phi, phi(x) = exp(-(x-1)^2), against the
/// classical solution.
SweepResult alpha_sweep(const SweepOptions& opts = {});

}  // namespace nlcvp
