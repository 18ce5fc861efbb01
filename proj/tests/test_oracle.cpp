#include <doctest.h>

#include <cmath>

#include "nlcvp/error.hpp"
#include "nlcvp/experiments.hpp"
#include "nlcvp/oracle.hpp"

using namespace nlcvp;
using doctest::Approx;

namespace {

const DomainSpec unit = DomainSpec::interval(0.0, 1.0);

std::shared_ptr<const DiscreteSpace> space_for(const KernelSpec& k, double h, double R = 2.0) {
    return std::make_shared<const DiscreteSpace>(build_mesh(unit, k, h, R));
}

double rel(const Matrix& a, const Matrix& b) {
    const double floor = 1e-4 * b.cwiseAbs().maxCoeff();
    double w = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        w = std::max(w, std::abs(a.data()[i] - b.data()[i]) / std::max(std::abs(b.data()[i]), floor));
    return w;
}

}  // namespace

TEST_CASE("zero kernel gives zero stiffness") {
    const auto k = make_peridynamic(1, 0.3, 0.0);
    const auto sys = dense_reference(space_for(k, 0.125), k);
    CHECK(sys.A.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.N_op.cwiseAbs().maxCoeff() == 0.0);
    // the mass matrix does not depend on the kernel
    CHECK(Vector::Ones(sys.size()).dot(sys.M * Vector::Ones(sys.size())) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a horizon wider than the domain couples the closure fully") {
    const auto k = make_peridynamic(1, 1.5, 0.1);
    const auto sys = dense_reference(space_for(k, 0.25), k);
    const auto U = sys.space->closure();
    for (int i : U)
        for (int j : U) CHECK(sys.A(i, j) != 0.0);
    CHECK(horizon_sparsity_violations(sys) == 0);
}

TEST_CASE("oracle agrees with the fast assembly") {
    for (const auto& k : {make_fractional(1, 0.8), make_peridynamic(1, 0.3, 1.0)}) {
        const auto sp = space_for(k, 0.125);
        const auto fast = assemble(sp, k), ref = dense_reference(sp, k);
        CHECK(rel(fast.A, ref.A) <= 1e-8);
        CHECK(rel(fast.N_op, ref.N_op) <= 1e-8);
        CHECK(rel(fast.M_tilde, ref.M_tilde) <= 1e-8);
    }
}

TEST_CASE("oracle refuses large spaces") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 1.0 / 64);
    REQUIRE(sp->size() > oracle_dof_budget);
    try {
        dense_reference(sp, k);
        FAIL("no budget error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::budget_exceeded);
    }
}

TEST_CASE("classical Neumann reference") {
    const auto z = local_reference_1d([](double) { return 0.0; }, 0.0, 0.0);
    for (double x : {0.0, 0.3, 1.0}) CHECK(std::abs(z.u(x)) <= 1e-14);

    // -u'' = 1, u'(0) = 1/2, u'(1) = -1/2: u = x/2 - x^2/2 - 1/12
    const auto s = local_reference_1d([](double) { return 1.0; }, -0.5, -0.5);
    for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        CHECK(s.u(x) == Approx(0.5 * x - 0.5 * x * x - 1.0 / 12.0).epsilon(1e-12));
        CHECK(s.du(x) == Approx(0.5 - x).epsilon(1e-12));
    }

    // data symmetric about 1/2 give a symmetric solution
    const auto c = local_reference_1d([](double x) { return std::cos(2.0 * M_PI * x); }, 0.0, 0.0);
    for (double x : {0.1, 0.2, 0.4}) CHECK(c.u(x) == Approx(c.u(1.0 - x)).epsilon(1e-10));

    CHECK_THROWS_AS(local_reference_1d([](double) { return 1.0; }, 0.0, 0.0), Error);
}

TEST_CASE("small alpha sweep") {
    SweepOptions o;
    o.alphas = {1.5, 1.8};
    o.h0 = 0.25;
    o.r_trunc = 2.0;
    const auto res = alpha_sweep(o);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.local_l2 > 0.0);
    for (const auto& r : res.rows) {
        CHECK(std::isfinite(r.l2_error));
        CHECK(r.gauss_green_residual <= 1e-9);
        CHECK(r.dofs > 0);
    }
    // h is capped by 2 - alpha
    CHECK(res.rows[1].h == Approx(0.2));
    CHECK(res.rows[1].boundary_gap < res.rows[0].boundary_gap);
    o.alphas = {2.0};
    CHECK_THROWS_AS(alpha_sweep(o), Error);
}
