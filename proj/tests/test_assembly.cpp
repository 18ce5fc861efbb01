#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlcvp/assembly.hpp"
#include "nlcvp/error.hpp"
#include "nlcvp/experiments.hpp"
#include "nlcvp/integrate.hpp"

using namespace nlcvp;
using doctest::Approx;

namespace {

const DomainSpec unit = DomainSpec::interval(0.0, 1.0);

std::shared_ptr<const DiscreteSpace> space_for(const KernelSpec& k, double h = 0.125, double R = 2.0) {
    return std::make_shared<const DiscreteSpace>(build_mesh(unit, k, h, R));
}

std::vector<KernelSpec> kernels() {
    return {make_fractional(1, 0.5), make_fractional(1, 1.0), make_fractional(1, 1.5),
            make_peridynamic(1, 0.3, normalized_peridynamic_amplitude(1, 0.3)),
            make_rescaled(make_peridynamic(1, 1.0, 1.5), 1.5)};
}

Vector randn(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

}  // namespace

TEST_CASE("dof partition") {
    const auto sp = space_for(make_fractional(1, 1.0));
    CHECK(sp->far_dof == sp->size() - 1);
    CHECK(sp->interior.size() == 7);
    CHECK(sp->interface.size() == 2);
    std::vector<int> seen(sp->size(), 0);
    for (auto* list : {&sp->interior, &sp->interface, &sp->complement})
        for (int i : *list) ++seen[i];
    for (int c : seen) CHECK(c == 1);
    CHECK(sp->closure().size() == 9);
    CHECK(sp->trace().size() == sp->interface.size() + sp->complement.size());
    const Vector one = sp->interpolate([](double) { return 1.0; });
    CHECK(one == Vector::Ones(sp->size()));
    CHECK(sp->evaluate(one, 7.0) == 1.0);
    CHECK(sp->evaluate(one, 0.3) == 1.0);
    // compact kernels have no far DOF
    CHECK(space_for(make_peridynamic(1, 0.3, 1.0))->far_dof == -1);
}

TEST_CASE("constants are in the kernel of A and N") {
    for (const auto& k : kernels()) {
        const auto sys = assemble(space_for(k), k);
        const Vector one = Vector::Ones(sys.size());
        const double amax = sys.A.cwiseAbs().maxCoeff();
        CHECK((sys.A * one).cwiseAbs().maxCoeff() <= 1e-10 * amax);
        CHECK((sys.N_op * one).cwiseAbs().maxCoeff() <= 1e-10 * amax);
        CHECK((sys.A - sys.A.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * amax);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sys.A);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12 * amax);
    }
}

TEST_CASE("matrix Gauss-Green identity") {
    for (const auto& k : kernels()) {
        const auto sys = assemble(space_for(k), k);
        const auto g = gauss_green_check(sys, 17, 100);
        CHECK(g.null_space <= 1e-10);
        CHECK(g.pair_residual <= 1e-9);
        CHECK(g.balance_residual <= 1e-9);
    }
}

TEST_CASE("second Gauss-Green identity") {
    // v'Pu - u'Pv = u'Nv - v'Nu
    std::mt19937_64 rng(5);
    for (const auto& k : kernels()) {
        const auto sys = assemble(space_for(k), k);
        const double scale = sys.A.norm();
        for (int t = 0; t < 20; ++t) {
            const Vector u = randn(rng, sys.size()), v = randn(rng, sys.size());
            const double lhs = v.dot(sys.P * u) - u.dot(sys.P * v);
            const double rhs = u.dot(sys.N_op * v) - v.dot(sys.N_op * u);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * scale * u.norm() * v.norm());
        }
    }
}

TEST_CASE("seminorm sandwich and embedding") {
    std::mt19937_64 rng(9);
    for (const auto& k : kernels()) {
        const auto sys = assemble(space_for(k), k);
        const auto s = seminorm_sandwich(sys, 23, 100);
        CHECK(s.violations == 0);
        const Matrix S = sys.seminorm();
        const double c1 = 2.0 * min_one_mass(k) + 2.0;
        for (int t = 0; t < 50; ++t) {
            const Vector u = randn(rng, sys.size());
            CHECK(u.dot(sys.M_tilde * u) <= c1 * (u.dot(sys.M * u) + u.dot(S * u)));
        }
    }
}

TEST_CASE("N operator against the pointwise normal derivative") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 0.125, 3.0);
    const auto sys = assemble(sp, k);
    const Vector u = sp->interpolate([](double x) { return x; });
    const Vector Nu = sys.N_op * u;
    const auto& v = sp->mesh.vertices;
    int j = 0;
    for (int i = 0; i < sp->num_nodes; ++i)
        if (std::abs(v[i] - 2.0) < std::abs(v[j] - 2.0)) j = i;
    REQUIRE(sp->kind[j] == DofKind::complement);
    double expect = 0.0, mass = 0.0;
    for (const auto& el : sp->mesh.elements) {
        if (el.nodes[0] != j && el.nodes[1] != j) continue;
        const bool left_node = el.nodes[0] == j;
        auto psi = [&](double y) { return left_node ? (el.right - y) / el.size() : (y - el.left) / el.size(); };
        expect += integrate::gauss([&](double y) { return psi(y) * pointwise_N(k, [](double x) { return x; }, y, unit); },
                                   el.left, el.right);
        mass += 0.5 * el.size();
    }
    CHECK(Nu[j] == Approx(expect).epsilon(1e-9));
    // about (1/4) ln 2 times the test-function mass
    CHECK(Nu[j] / mass == Approx(0.25 * std::log(2.0)).epsilon(0.05));
    CHECK(assemble_N(sp, k) == sys.N_op);
}

TEST_CASE("trace DK Gram matrix") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 0.125, 3.0);
    const Matrix T = assemble_trace_DK(*sp, k);
    REQUIRE(T.rows() == static_cast<Eigen::Index>(sp->trace().size()));
    CHECK((T - T.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * T.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // constant: only the weighted mass, int_{Omega^c} (1+|x|)^-2 = 1 + 1/2
    const Vector one = Vector::Ones(T.rows());
    CHECK(one.dot(T * one) == Approx(1.5).epsilon(1e-10));
    CHECK_THROWS_AS(assemble_trace_DK(*space_for(make_peridynamic(1, 0.3, 1.0)), make_peridynamic(1, 0.3, 1.0)), Error);
}

TEST_CASE("trace DK difference scales with the kernel") {
    // v = 1 on the right of the complement, 0 on the left: the seminorm part is
    // mesh independent up to the resolution of the boundary layer
    const auto k = make_fractional(1, 1.0);
    double prev = 0.0;
    for (double h : {0.125, 0.0625}) {
        const auto sp = space_for(k, h, 2.0);
        const Matrix T = assemble_trace_DK(*sp, k);
        const auto tr = sp->trace();
        const Vector all = sp->interpolate([](double x) { return x > 0.5 ? std::min(1.0, x) : 0.0; });
        Vector v(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) v[i] = all[tr[i]];
        const double val = v.dot(T * v);
        if (prev > 0.0) CHECK(val == Approx(prev).epsilon(0.05));
        prev = val;
    }
}

TEST_CASE("peridynamic stiffness respects the horizon") {
    const auto k = make_peridynamic(1, 0.25, 2.0);
    const auto sys = assemble(space_for(k, 0.0625, 2.0), k);
    CHECK(horizon_sparsity_violations(sys) == 0);
    int zeros = 0;
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i)
        for (Eigen::Index j = 0; j < sys.A.cols(); ++j) zeros += sys.A(i, j) == 0.0;
    CHECK(zeros > sys.A.size() / 4);
}

TEST_CASE("assembly is deterministic across thread counts") {
    const auto k = make_fractional(1, 0.7);
    const auto sp = space_for(k, 0.0625, 2.0);
    AssembleOptions one, four;
    four.threads = 4;
    const auto a = assemble(sp, k, one), b = assemble(sp, k, four);
    CHECK(a.A == b.A);
    CHECK(a.P == b.P);
    CHECK(a.N_op == b.N_op);
    CHECK(a.M_tilde == b.M_tilde);
}

TEST_CASE("load vectors and masses") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 0.125, 2.0);
    CHECK(load_interior(*sp, [](double) { return 1.0; }).sum() == Approx(1.0).epsilon(1e-14));
    const Vector F = load_interior(*sp, [](double x) { return x; });
    CHECK(F.sum() == Approx(0.5).epsilon(1e-14));
    for (int i : sp->complement) CHECK(F[i] == 0.0);
    const Matrix M = interior_mass(*sp);
    const Vector one = Vector::Ones(sp->size());
    CHECK(one.dot(M * one) == Approx(1.0).epsilon(1e-14));
    // hats on the complement sum to one, the far DOF takes the tail
    const Vector G = load_complement(*sp, [](double y) { return 1.0 / (1.0 + y * y); });
    for (int i : sp->interior) CHECK(G[i] == 0.0);
    CHECK(G.sum() == Approx(3.0 * std::numbers::pi / 4.0).epsilon(1e-9));
    try {
        load_complement(*sp, [](double) { return 1.0; });
        FAIL("constant data on an unbounded complement was accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::data_not_integrable);
    }
}

TEST_CASE("beta mass lives on the complement") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 0.125, 2.0);
    const Field beta = [](double y) { return 1.0 / (1.0 + y * y); };
    const Matrix Mb = beta_mass(*sp, beta);
    for (int i : sp->closure()) CHECK(Mb.row(i).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Mb - Mb.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * Mb.cwiseAbs().maxCoeff());
    // complement hats sum to one except on the first collar element on each side
    const double total = Mb.sum(), exact = 3.0 * std::numbers::pi / 4.0;
    CHECK(total < exact);
    CHECK(total == Approx(exact).epsilon(0.01));
    // far DOF: int_{|y|>2} beta = pi - 2 atan 2
    CHECK(Mb(sp->far_dof, sp->far_dof) == Approx(std::numbers::pi - 2.0 * std::atan(2.0)).epsilon(1e-8));
    // constant beta is not integrable at infinity: the far DOF gets the unit shell
    const Matrix M1 = beta_mass(*sp, [](double) { return 1.0; });
    CHECK(M1(sp->far_dof, sp->far_dof) == Approx(2.0));
}

TEST_CASE("weighted complement mass") {
    const auto k = make_fractional(1, 1.0);
    const auto sp = space_for(k, 0.125, 2.0);
    const auto sys = assemble(sp, k);
    for (int i : sp->interior) CHECK(sys.M_tilde.row(i).cwiseAbs().maxCoeff() == 0.0);
    const Matrix W = weighted_complement_mass(*sp, *sys.nu_tilde);
    CHECK((W - sys.M_tilde).cwiseAbs().maxCoeff() <= 1e-14 * W.cwiseAbs().maxCoeff());
    CHECK(Vector::Ones(sp->size()).dot(W * Vector::Ones(sp->size())) > 0.0);
}
