#pragma once

// Singular pair integrals of the kernel over element pairs, pointwise
// evaluation of L_eps u, Lu and Nu, and far-field tail couplings.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "nlcvp/geometry.hpp"
#include "nlcvp/kernels.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

struct QuadRule {
    enum class Strategy { variable_transform, semi_analytic_1d };

    int order = 20;
    Strategy strategy = Strategy::semi_analytic_1d;
    double target_rel_tol = 1e-9;

    void validate() const;
    nlohmann::json to_json() const;
};

/// A function that is linear on each of two elements, given by its values
/// at the element endpoints.
struct LinearPair {
    std::array<double, 2> on_e1{};
    std::array<double, 2> on_e2{};
};

/// Affine function c0 + cx*X + cy*Y of the local coordinates X = x - c1,
/// Y = y - c2 attached to an element pair.
struct Affine {
    double c0 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
};

/// Precomputed moments int nu(|s0 + rho|) rho^k d rho over the pieces of the
/// difference variable rho = X - Y. Every product of two affine factors over
/// E1 x E2 is then a finite sum over pieces.
class PairIntegrator {
public:
    PairIntegrator(const Element& e1, const Element& e2, const KernelSpec& k,
                   const QuadRule& rule = {});

    double c1() const { return c1_; }
    double c2() const { return c2_; }
    bool empty() const { return pieces_.empty(); }

    /// int_{E1 x E2} f(x, y) g(x, y) nu(x - y) dx dy.
    double product(const Affine& f, const Affine& g) const;

    /// Difference factor phi(x) - phi(y) for a function linear on each element.
    Affine difference(const LinearPair& phi) const;
    /// phi(x) only (x in E1).
    Affine x_part(const std::array<double, 2>& on_e1) const;
    /// phi(y) only (y in E2).
    Affine y_part(const std::array<double, 2>& on_e2) const;

private:
    struct Piece {
        double lo, hi;
        double l0, l1;  // lower Y limit: l0 + l1 * rho
        double u0, u1;  // upper Y limit: u0 + u1 * rho
        std::array<double, 4> moment;
    };

    const Element& e1_;
    const Element& e2_;
    double c1_ = 0.0;
    double c2_ = 0.0;
    std::vector<Piece> pieces_;
};

/// int_{E1 x E2} (pa(x) - pa(y)) (pb(x) - pb(y)) nu(x - y) dx dy.
double pair_integral(const Element& e1, const Element& e2, const KernelSpec& k,
                     const LinearPair& pa, const LinearPair& pb, const QuadRule& rule = {});

struct PointwiseL {
    double truncated = 0.0;  // L_eps u(x)
    double full = 0.0;       // Lu(x) by the second-difference form
};

/// L_eps u(x) = int_{|h| > eps} (u(x) - u(x+h)) nu(h) dh together with Lu(x).
/// One-dimensional kernels only.
PointwiseL pointwise_L(const KernelSpec& k, const Field& u, double x, double eps);

/// Lu(x) alone, through the second-difference form.
double pointwise_L_full(const KernelSpec& k, const Field& u, double x);

/// Nu(y) = int_Omega (u(y) - u(x)) nu(y - x) dx for y outside closure(Omega).
double pointwise_N(const KernelSpec& k, const Field& u, double y, const DomainSpec& omega);

/// w(x) = int_{|y| > R} nu(x - y) dy for |x| < R.
double far_weight(const KernelSpec& k, double x, double R);

/// int_E phi(x) w(x) dx with phi linear on E.
double far_field_coupling(const KernelSpec& k, const Element& e, const std::array<double, 2>& phi,
                          double R);

}  // namespace nlcvp
