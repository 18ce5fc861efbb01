// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nlcvp/error.hpp"
#include "nlcvp/experiments.hpp"
#include "nlcvp/oracle.hpp"
#include "nlcvp/solvers.hpp"

using namespace nlcvp;

namespace {

const DomainSpec unit = DomainSpec::interval(0.0, 1.0);
const std::vector<double> alphas{0.5, 1.0, 1.5};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

AssembledSystem system_for(const KernelSpec& k, double h, double R, const MeshOptions& o = {}) {
    return assemble(std::make_shared<const DiscreteSpace>(build_mesh(unit, k, h, R, o)), k);
}

KernelSpec peridynamic() { return make_peridynamic(1, 0.3, normalized_peridynamic_amplitude(1, 0.3)); }

double max_rel(const Matrix& a, const Matrix& b) {
    const double floor = 1e-4 * b.cwiseAbs().maxCoeff();
    double e = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            e = std::max(e, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), floor));
    return e;
}

struct Outcome {
    bool pass = true;
    std::string detail;
    void add(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fail]");
    }
};

Outcome oracle_equivalence() {
    Outcome o;
    for (double a : alphas) {
        const auto k = make_fractional(1, a);
        const auto fast = system_for(k, 0.125, 2.0);
        const auto ref = dense_reference(fast.space, k);
        double e = 0.0;
        for (auto [x, y] : {std::pair{&fast.A, &ref.A}, {&fast.P, &ref.P}, {&fast.N_op, &ref.N_op},
                            {&fast.M, &ref.M}, {&fast.M_tilde, &ref.M_tilde}})
            e = std::max(e, max_rel(*x, *y));
        o.add(e <= 1e-8, "alpha " + fmt("%g", a) + " err " + fmt("%.2e", e));
    }
    return o;
}

Outcome gauss_green() {
    Outcome o;
    for (double a : alphas) {
        const auto g = gauss_green_check(system_for(make_fractional(1, a), 0.125, 2.0), 7, 100);
        o.add(g.null_space <= 1e-10 && g.pair_residual <= 1e-9 && g.balance_residual <= 1e-9,
              "alpha " + fmt("%g", a) + " null " + fmt("%.1e", g.null_space) + " pair " +
                  fmt("%.1e", g.pair_residual) + " balance " + fmt("%.1e", g.balance_residual));
    }
    return o;
}

Outcome sandwich() {
    Outcome o;
    const std::vector<std::pair<std::string, KernelSpec>> ks{
        {"fractional", make_fractional(1, 1.0)},
        {"peridynamic", peridynamic()},
        {"rescaled", make_rescaled(make_peridynamic(1, 1.0, 1.5), 1.5)}};
    for (const auto& [name, k] : ks) {
        const auto s = seminorm_sandwich(system_for(k, 0.125, 2.0), 11, 100);
        o.add(s.violations == 0, name + " violations " + std::to_string(s.violations));
    }
    return o;
}

Outcome spectra() {
    Outcome o;
    std::vector<std::pair<std::string, KernelSpec>> ks;
    for (double a : alphas) ks.emplace_back("alpha " + fmt("%g", a), make_fractional(1, a));
    ks.emplace_back("peridynamic", peridynamic());
    for (const auto& [name, k] : ks) {
        const auto sys = system_for(k, 0.125, 2.0);
        const auto neu = eig(sys, EigVariant::neumann, 2);
        const Vector v0 = neu.vectors.col(0);
        const double dev = (v0.array() - v0.mean()).abs().maxCoeff() / v0.cwiseAbs().maxCoeff();
        const double l1 = eig(sys, EigVariant::dirichlet, 1).values[0];
        const double bound = 2.0 * tail_mass(k, unit.diameter());
        o.add(std::abs(neu.values[0]) <= 1e-10 && dev <= 1e-8 && neu.values[1] > 0.0 && l1 >= bound - 1e-10,
              name + " mu0 " + fmt("%.1e", neu.values[0]) + " mu1 " + fmt("%.3g", neu.values[1]) + " lambda1 " +
                  fmt("%.4g", l1) + " vs " + fmt("%.4g", bound));
    }
    return o;
}

Outcome well_posedness() {
    Outcome o;
    const SmoothField phi{[](double x) { return std::exp(-(x - 0.3) * (x - 0.3)); },
                          [](double x) { return -2.0 * (x - 0.3) * std::exp(-(x - 0.3) * (x - 0.3)); }};
    for (double a : alphas) {
        const auto k = make_fractional(1, a);
        const auto sys = system_for(k, 0.125, 2.0);
        const auto one = solve_neumann(sys, [](double) { return 1.0; }, [](double) { return 0.0; });
        const auto rows = manufactured_study(k, unit, phi, {0.25, 0.125, 0.0625, 0.03125}, 2.0);
        bool dec = true;
        double worst_res = one.residual;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            worst_res = std::max(worst_res, rows[i].residual);
            if (i > 0) dec = dec && rows[i].l2_error < rows[i - 1].l2_error;
        }
        o.add(worst_res <= 1e-9 && std::abs(one.compatibility_defect - 1.0) <= 1e-12 && dec,
              "alpha " + fmt("%g", a) + " residual " + fmt("%.1e", worst_res) + " defect " +
                  fmt("%.15g", one.compatibility_defect) + " errors " + fmt("%.2e", rows.front().l2_error) + ".." +
                  fmt("%.2e", rows.back().l2_error));
    }
    return o;
}

Outcome robin() {
    Outcome o;
    for (double a : alphas) {
        const auto rows = robin_trend(system_for(make_fractional(1, a), 0.125, 2.0),
                                      [](double x) { return 1.0 + std::sin(3.0 * x); }, {10.0, 1e3, 1e5});
        bool dec = true;
        std::string d;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0) dec = dec && rows[i].distance < rows[i - 1].distance;
            d += (i ? " " : "") + fmt("%.2e", rows[i].distance);
        }
        o.add(dec, "alpha " + fmt("%g", a) + " distances " + d);
    }
    return o;
}

Outcome dtn() {
    Outcome o;
    MeshOptions uniform;
    uniform.grading_ratio = 1.0;
    uniform.min_size_factor = 1.0;
    const auto sys = system_for(make_fractional(1, 1.0), 0.2, 1.5, uniform);
    const auto c = dtn_check(sys, -1.0, 3, 50);
    o.add(c.symmetry <= 1e-11, "dofs " + std::to_string(sys.size()) + " symmetry " + fmt("%.1e", c.symmetry));
    o.add(c.coercivity_slack >= -1e-9, "coercivity slack " + fmt("%.3g", c.coercivity_slack));
    for (double s : {1.0, 10.0}) {
        const auto r = dtn_spectral_check(sys, [s](double) { return s; });
        o.add(r.pass, "beta " + fmt("%g", s) + " sigma_min/|D| " + fmt("%.1e", r.sigma_min / r.norm_D));
    }
    return o;
}

Outcome sweep() {
    Outcome o;
    const auto res = alpha_sweep();
    bool l2 = true, gap = true;
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        l2 = l2 && res.rows[i].l2_error < res.rows[i - 1].l2_error;
        gap = gap && res.rows[i].boundary_gap < res.rows[i - 1].boundary_gap;
    }
    const double last = res.rows.back().l2_error / res.local_l2;
    o.add(l2, "l2 column decreasing");
    o.add(last <= 0.05, "final relative error " + fmt("%.3g", last));
    o.add(gap, "boundary gap decreasing");
    return o;
}

Outcome probe() {
    Outcome o;
    const auto good = nonexistence_probe(1.0, 0.3);
    const auto& r = good.rungs;
    const double var = std::abs(r.back().norm / r[r.size() - 2].norm - 1.0);
    o.add(var < 0.10, "gamma 0.3 last-rung variation " + fmt("%.3g", var));
    const auto bad = nonexistence_probe(1.0, 0.8);
    bool grows = bad.rungs.size() >= 3;
    double min_ratio = INFINITY;
    for (std::size_t i = 1; i < bad.rungs.size(); ++i) min_ratio = std::min(min_ratio, bad.rungs[i].norm / bad.rungs[i - 1].norm);
    grows = grows && min_ratio > 1.5;
    o.add(grows, "gamma 0.8 min growth per rung " + fmt("%.3g", min_ratio));
    return o;
}

Outcome weights() {
    Outcome o;
    std::vector<Point> samples;
    for (int i = 0; i <= 200; ++i) samples.push_back(point1d(-50.0 + 0.5 * i));
    const auto rep = comparability_report(make_fractional(1, 0.5), Ball{point1d(0.5), 0.25}, 2.0, samples);
    o.add(rep.applicable && std::isfinite(rep.band) && rep.band >= 1.0, "band " + fmt("%.4g", rep.band));
    o.add(std::isfinite(rep.profile_band) && rep.profile_band >= 1.0, "profile band " + fmt("%.4g", rep.profile_band));
    return o;
}

Outcome trace() {
    Outcome o;
    for (double a : {0.5, 1.0}) {
        const auto k = make_fractional(1, a);
        const auto c = trace_band(k, unit, 0.125, 2.0, 5, 50);
        const auto f = trace_band(k, unit, 0.0625, 2.0, 5, 50);
        const double lo = std::max(c.r_min, f.r_min) / std::min(c.r_min, f.r_min);
        const double hi = std::max(c.r_max, f.r_max) / std::min(c.r_max, f.r_max);
        o.add(c.r_min > 0.0 && f.r_min > 0.0 && std::isfinite(c.r_max + f.r_max) && lo < 2.0 && hi < 2.0,
              "alpha " + fmt("%g", a) + " band [" + fmt("%.3g", f.r_min) + ", " + fmt("%.3g", f.r_max) +
                  "] endpoint variation " + fmt("%.3g", lo) + " " + fmt("%.3g", hi));
    }
    return o;
}

Outcome peridynamic_corollaries() {
    Outcome o;
    const auto cfg = parse_config({{"schema_version", 1}, {"experiment", "peridynamic"}, {"seed", 13}});
    const auto res = run_experiment(cfg);
    for (const auto& [name, ok] : res.summary["pass"].items()) o.add(ok.get<bool>(), name);
    o.add(!res.system->space->mesh.far_field, "exact collar, no far field");
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"null space and Gauss-Green", gauss_green},
        {"seminorm sandwich", sandwich},
        {"spectra", spectra},
        {"well-posedness", well_posedness},
        {"Robin to Dirichlet", robin},
        {"Dirichlet-to-Neumann", dtn},
        {"alpha to 2 transition", sweep},
        {"non-existence probe", probe},
        {"weight comparability", weights},
        {"trace-norm equivalence", trace},
        {"peridynamic corollaries", peridynamic_corollaries}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %2zu %-28s %s  (%.1fs) %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
