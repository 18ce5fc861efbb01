#include "nlcvp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "nlcvp/error.hpp"
#include "nlcvp/integrate.hpp"
#include "nlcvp/oracle.hpp"
#include "nlcvp/solvers.hpp"

namespace nlcvp {

using nlohmann::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// fields

double need_number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw SchemaError(path + "." + key, "missing");
    if (!j.at(key).is_number()) throw SchemaError(path + "." + key, "expected a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw SchemaError(path + "." + key, "expected a finite number");
    return v;
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw SchemaError(path + "." + it.key(), "unknown field");
    }
}

}  // namespace

SmoothField parse_field(const json& j, const std::string& path) {
    if (j.is_number()) {
        const double c = j.get<double>();
        if (!std::isfinite(c)) throw SchemaError(path, "expected a finite number");
        return {[c](double) { return c; }, [](double) { return 0.0; }};
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw SchemaError(path, "expected a number or an object with a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        only_keys(j, path, {"kind", "value"});
        const double c = need_number(j, "value", path);
        return {[c](double) { return c; }, [](double) { return 0.0; }};
    }
    if (kind == "polynomial") {
        only_keys(j, path, {"kind", "coefficients"});
        if (!j.contains("coefficients") || !j.at("coefficients").is_array())
            throw SchemaError(path + ".coefficients", "expected an array of numbers");
        std::vector<double> c;
        for (std::size_t i = 0; i < j.at("coefficients").size(); ++i) {
            const auto& e = j.at("coefficients")[i];
            if (!e.is_number()) throw SchemaError(path + ".coefficients[" + std::to_string(i) + "]", "expected a number");
            c.push_back(e.get<double>());
        }
        auto value = [c](double x) {
            double s = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
            return s;
        };
        auto deriv = [c](double x) {
            double s = 0.0;
            for (std::size_t i = c.size(); i-- > 1;) s = s * x + static_cast<double>(i) * c[i];
            return s;
        };
        return {value, deriv};
    }
    if (kind == "sine") {
        only_keys(j, path, {"kind", "amplitude", "frequency", "phase"});
        const double a = j.contains("amplitude") ? need_number(j, "amplitude", path) : 1.0;
        const double w = need_number(j, "frequency", path);
        const double p = j.contains("phase") ? need_number(j, "phase", path) : 0.0;
        return {[=](double x) { return a * std::sin(w * x + p); },
                [=](double x) { return a * w * std::cos(w * x + p); }};
    }
    if (kind == "gaussian") {
        only_keys(j, path, {"kind", "amplitude", "center", "width"});
        const double a = j.contains("amplitude") ? need_number(j, "amplitude", path) : 1.0;
        const double c = j.contains("center") ? need_number(j, "center", path) : 0.0;
        const double s = need_number(j, "width", path);
        if (!(s > 0.0)) throw SchemaError(path + ".width", "must be positive");
        return {[=](double x) { return a * std::exp(-(x - c) * (x - c) / (s * s)); },
                [=](double x) { return -2.0 * a * (x - c) / (s * s) * std::exp(-(x - c) * (x - c) / (s * s)); }};
    }
    if (kind == "sum") {
        only_keys(j, path, {"kind", "terms"});
        if (!j.contains("terms") || !j.at("terms").is_array())
            throw SchemaError(path + ".terms", "expected an array of fields");
        std::vector<SmoothField> terms;
        for (std::size_t i = 0; i < j.at("terms").size(); ++i)
            terms.push_back(parse_field(j.at("terms")[i], path + ".terms[" + std::to_string(i) + "]"));
        return {[terms](double x) {
                    double s = 0.0;
                    for (const auto& t : terms) s += t.value(x);
                    return s;
                },
                [terms](double x) {
                    double s = 0.0;
                    for (const auto& t : terms) s += t.derivative(x);
                    return s;
                }};
    }
    throw SchemaError(path + ".kind", "unknown field kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// configuration

namespace {

enum class P { number, positive, integer, number_list, positive_list, field, choice, optional_number };

struct ParamSpec {
    const char* key;
    P type;
    json def;
    std::vector<std::string> choices{};
};

json sine(double a, double w) { return {{"kind", "sine"}, {"amplitude", a}, {"frequency", w}, {"phase", 0.0}}; }

const std::map<std::string, std::vector<ParamSpec>>& param_specs() {
    static const std::map<std::string, std::vector<ParamSpec>> specs = {
        {"assemble-check", {{"tolerance", P::positive, 1e-8}}},
        {"gauss-green", {{"pairs", P::integer, 100}}},
        {"solve",
         {{"variant", P::choice, "neumann", {"neumann", "neumann-weighted", "dirichlet", "robin"}},
          {"f", P::field, sine(1.0, 2.0 * M_PI)},
          {"g", P::field, 0.0},
          {"beta", P::field, 1.0},
          {"phi", P::field, json{{"kind", "gaussian"}, {"amplitude", 1.0}, {"center", 0.3}, {"width", 1.0}}},
          {"refinements", P::positive_list, json::array()}}},
        {"eig",
         {{"variant", P::choice, "neumann", {"neumann", "dirichlet", "robin"}},
          {"count", P::integer, 6},
          {"beta", P::field, 1.0}}},
        {"poincare", {{"probes", P::integer, 100}}},
        {"robin",
         {{"betas", P::positive_list, json::array({10.0, 1e3, 1e5})},
          {"f", P::field, json{{"kind", "sum"}, {"terms", json::array({1.0, sine(1.0, 3.0)})}}}}},
        {"dtn", {{"lambda", P::number, -1.0}, {"samples", P::integer, 50}}},
        {"dtn-spectral", {{"beta", P::field, 1.0}, {"scales", P::positive_list, json::array({1.0, 10.0})}}},
        {"trace-compare",
         {{"levels", P::positive_list, json::array({0.125, 0.0625})}, {"samples", P::integer, 50}}},
        {"alpha-sweep",
         {{"alphas", P::positive_list, json::array({1.2, 1.5, 1.8, 1.95})},
          {"h0", P::positive, 0.125},
          {"r_trunc", P::positive, 4.0}}},
        {"nonexistence-probe",
         {{"alpha", P::positive, 1.0},
          {"gamma", P::number, 0.8},
          {"h", P::positive_list, json::array({1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64})},
          {"r_trunc", P::positive_list, json::array({4.0, 64.0, 1024.0, 16384.0})}}},
        {"peridynamic",
         {{"delta", P::positive, 0.3},
          {"amplitude", P::optional_number, nullptr},
          {"refinements", P::positive_list, json::array({0.25, 0.125, 0.0625})},
          {"pairs", P::integer, 100}}},
        {"weights-report",
         {{"base_radius", P::optional_number, nullptr},
          {"radius", P::positive, 2.0},
          {"max_abs", P::positive, 50.0},
          {"samples", P::integer, 201},
          {"deltas", P::positive_list, json::array({0.5, 0.25, 0.125, 0.0625})}}},
    };
    return specs;
}

json check_param(const ParamSpec& s, const json& v, const std::string& path) {
    auto number = [&](const json& x, const std::string& p) {
        if (!x.is_number()) throw SchemaError(p, "expected a number");
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw SchemaError(p, "expected a finite number");
        return d;
    };
    switch (s.type) {
        case P::number: number(v, path); return v;
        case P::positive:
            if (!(number(v, path) > 0.0)) throw SchemaError(path, "must be positive");
            return v;
        case P::optional_number:
            if (v.is_null()) return v;
            if (!(number(v, path) > 0.0)) throw SchemaError(path, "must be positive");
            return v;
        case P::integer:
            if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 100000)
                throw SchemaError(path, "expected an integer in [1, 100000]");
            return v;
        case P::number_list:
        case P::positive_list:
            if (!v.is_array()) throw SchemaError(path, "expected an array of numbers");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string p = path + "[" + std::to_string(i) + "]";
                const double d = number(v[i], p);
                if (s.type == P::positive_list && !(d > 0.0)) throw SchemaError(p, "must be positive");
            }
            return v;
        case P::field: parse_field(v, path); return v;
        case P::choice:
            if (!v.is_string() || std::find(s.choices.begin(), s.choices.end(), v.get<std::string>()) == s.choices.end()) {
                std::string all;
                for (const auto& c : s.choices) all += (all.empty() ? "" : ", ") + c;
                throw SchemaError(path, "expected one of: " + all);
            }
            return v;
    }
    return v;
}

const json& default_kernel() {
    static const json k = {{"family", "fractional"}, {"d", 1}, {"params", {{"alpha", 1.0}}}};
    return k;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : param_specs()) v.push_back(k);
        return v;
    }();
    return kinds;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw SchemaError("$", "expected an object");
    only_keys(j, "$", {"schema_version", "experiment", "seed", "kernel", "domain", "mesh", "quadrature", "params"});
    ExperimentConfig cfg;
    json raw;

    if (!j.contains("schema_version")) throw SchemaError("schema_version", "missing");
    if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != config_schema_version)
        throw SchemaError("schema_version", "expected " + std::to_string(config_schema_version));
    raw["schema_version"] = config_schema_version;

    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw SchemaError("experiment", "expected a string");
    cfg.kind = j.at("experiment").get<std::string>();
    const auto& specs = param_specs();
    if (!specs.count(cfg.kind)) {
        std::string all;
        for (const auto& k : experiment_kinds()) all += (all.empty() ? "" : ", ") + k;
        throw SchemaError("experiment", "unknown kind '" + cfg.kind + "'; expected one of: " + all);
    }
    raw["experiment"] = cfg.kind;

    if (j.contains("seed")) {
        const auto& s = j.at("seed");
        if (!s.is_number_integer() || s.get<long long>() < 0 || s.get<long long>() > 0xffffffffLL)
            throw SchemaError("seed", "expected a nonnegative 32-bit integer");
        cfg.seed = s.get<unsigned>();
    }
    raw["seed"] = cfg.seed;

    const json kj = j.value("kernel", default_kernel());
    try {
        cfg.kernel = KernelSpec::from_json(kj);
    } catch (const std::exception& e) {
        throw SchemaError("kernel", e.what());
    }
    raw["kernel"] = kj;

    const json dj = j.value("domain", json{{"shape", "interval"}, {"a", 0.0}, {"b", 1.0}});
    try {
        cfg.domain = DomainSpec::from_json(dj);
    } catch (const std::exception& e) {
        throw SchemaError("domain", e.what());
    }
    raw["domain"] = dj;

    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        if (!m.is_object()) throw SchemaError("mesh", "expected an object");
        only_keys(m, "mesh", {"h", "r_trunc"});
        if (m.contains("h")) cfg.h = need_number(m, "h", "mesh");
        if (m.contains("r_trunc")) cfg.r_trunc = need_number(m, "r_trunc", "mesh");
        if (!(cfg.h > 0.0)) throw SchemaError("mesh.h", "must be positive");
        if (!(cfg.r_trunc > 0.0)) throw SchemaError("mesh.r_trunc", "must be positive");
    }
    raw["mesh"] = {{"h", cfg.h}, {"r_trunc", cfg.r_trunc}};

    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        if (!q.is_object()) throw SchemaError("quadrature", "expected an object");
        only_keys(q, "quadrature", {"order", "strategy", "target_rel_tol"});
        if (q.contains("order")) {
            if (!q.at("order").is_number_integer()) throw SchemaError("quadrature.order", "expected an integer");
            cfg.rule.order = q.at("order").get<int>();
        }
        if (q.contains("target_rel_tol")) cfg.rule.target_rel_tol = need_number(q, "target_rel_tol", "quadrature");
        if (q.contains("strategy")) {
            const auto& s = q.at("strategy");
            if (s == "semi-analytic-1d") cfg.rule.strategy = QuadRule::Strategy::semi_analytic_1d;
            else if (s == "variable-transform") cfg.rule.strategy = QuadRule::Strategy::variable_transform;
            else throw SchemaError("quadrature.strategy", "expected semi-analytic-1d or variable-transform");
        }
        try {
            cfg.rule.validate();
        } catch (const Error& e) {
            throw SchemaError("quadrature", e.what());
        }
    }
    raw["quadrature"] = cfg.rule.to_json();

    const json params = j.value("params", json::object());
    if (!params.is_object()) throw SchemaError("params", "expected an object");
    const auto& spec = specs.at(cfg.kind);
    for (auto it = params.begin(); it != params.end(); ++it) {
        const bool known = std::any_of(spec.begin(), spec.end(), [&](const ParamSpec& s) { return it.key() == s.key; });
        if (!known) throw SchemaError("params." + it.key(), "unknown field for experiment '" + cfg.kind + "'");
    }
    for (const auto& s : spec) {
        const std::string path = std::string("params.") + s.key;
        cfg.params[s.key] = check_param(s, params.contains(s.key) ? params.at(s.key) : s.def, path);
    }
    raw["params"] = cfg.params;
    cfg.raw = raw;
    return cfg;
}

// ---------------------------------------------------------------------------
// tables

namespace {

std::string number17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return number17(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    return v.get<std::string>();
}

// json cannot hold non-finite numbers
json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string Table::to_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell(r[i]);
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// shared checks

namespace {

Vector random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

double l2_on_omega(const DiscreteSpace& sp, const Field& err) {
    double s = 0.0;
    for (int e : sp.mesh.interior_elements()) {
        const auto& el = sp.mesh.elements[e];
        s += integrate::gauss([&](double x) { return err(x) * err(x); }, el.left, el.right);
    }
    return std::sqrt(s);
}

double dist_m(const AssembledSystem& sys, const Vector& a, const Vector& b) {
    const Vector d = a - b;
    return std::sqrt(std::max(0.0, d.dot(sys.M * d)));
}

}  // namespace

GaussGreenReport gauss_green_check(const AssembledSystem& sys, unsigned seed, int pairs) {
    GaussGreenReport rep;
    rep.pairs = pairs;
    const int n = sys.size();
    const double amax = sys.A.cwiseAbs().maxCoeff();
    rep.null_space = (sys.A * Vector::Ones(n)).cwiseAbs().maxCoeff() / std::max(amax, 1e-300);
    const Matrix PN = sys.P + sys.N_op;
    const double scale = std::max(sys.A.norm(), 1e-300);
    std::mt19937_64 rng(seed);
    for (int p = 0; p < pairs; ++p) {
        const Vector u = random_vector(rng, n);
        const Vector v = random_vector(rng, n);
        const double r = std::abs(v.dot(sys.A * u) - v.dot(PN * u)) / (scale * u.norm() * v.norm());
        rep.pair_residual = std::max(rep.pair_residual, r);
        const double b = std::abs(Vector::Ones(n).dot(PN * u)) / (scale * u.norm() * std::sqrt(double(n)));
        rep.balance_residual = std::max(rep.balance_residual, b);
    }
    return rep;
}

SandwichReport seminorm_sandwich(const AssembledSystem& sys, unsigned seed, int samples) {
    SandwichReport rep;
    rep.samples = samples;
    const Matrix S = sys.seminorm();
    std::mt19937_64 rng(seed);
    for (int p = 0; p < samples; ++p) {
        const Vector u = random_vector(rng, sys.size());
        const double a = u.dot(sys.A * u), s = u.dot(S * u);
        const double scale = std::max(std::abs(a), 1e-300);
        const double slack = std::min(a - s, 2.0 * s - a) / scale;
        rep.worst = std::min(rep.worst, slack);
        if (slack < -1e-12) ++rep.violations;
    }
    return rep;
}

std::vector<ManufacturedRow> manufactured_study(const KernelSpec& k, const DomainSpec& dom,
                                                const SmoothField& phi, const std::vector<double>& hs,
                                                double r_trunc, int threads) {
    const auto* iv = std::get_if<Interval>(&dom.shape);
    if (!iv) throw Error(ErrorCode::invalid_domain, "manufactured solutions are one-dimensional");
    double mean = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double a = iv->a + (iv->b - iv->a) * i / 64.0, b = iv->a + (iv->b - iv->a) * (i + 1) / 64.0;
        mean += integrate::gauss(phi.value, a, b);
    }
    mean /= dom.measure();
    std::vector<ManufacturedRow> rows;
    for (double h : hs) {
        auto space = std::make_shared<const DiscreteSpace>(build_mesh(dom, k, h, r_trunc));
        AssembleOptions ao;
        ao.threads = threads;
        const auto sys = assemble(space, k, ao);
        const Vector F = load_interior(*space, [&](double x) { return pointwise_L_full(k, phi.value, x); });
        const Vector G = load_normal_derivative(sys, phi.value, phi.derivative);
        const auto sol = solve_neumann(sys, F + G);
        ManufacturedRow r;
        r.h = h;
        r.dofs = sys.size();
        r.defect = sol.compatibility_defect;
        r.residual = sol.residual;
        r.l2_error = l2_on_omega(*space, [&](double x) { return space->evaluate(sol.u, x) - (phi.value(x) - mean); });
        rows.push_back(r);
    }
    return rows;
}

std::vector<RobinRow> robin_trend(const AssembledSystem& sys, const Field& f, const std::vector<double>& betas) {
    const auto& sp = *sys.space;
    const Vector F = load_interior(sp, f);
    const auto dir = solve_dirichlet(sys, F, Vector::Zero(sp.complement.size()));
    std::vector<RobinRow> rows;
    for (double b : betas) {
        const Matrix Mb = beta_mass(sp, [b](double) { return b; });
        const auto rob = solve_robin(sys, F, Mb);
        rows.push_back({b, dist_m(sys, rob.u, dir.u), rob.residual});
    }
    return rows;
}

DtnCheck dtn_check(const AssembledSystem& sys, double lambda, unsigned seed, int samples) {
    DtnCheck rep;
    rep.lambda = lambda;
    rep.samples = samples;
    const Matrix D = dtn_assemble(sys, lambda);
    rep.symmetry = (D - D.transpose()).cwiseAbs().maxCoeff() / std::max(D.cwiseAbs().maxCoeff(), 1e-300);
    const int m = static_cast<int>(D.rows());
    rep.coercivity_slack = std::numeric_limits<double>::quiet_NaN();
    if (lambda < 0.0) {
        const double c = std::min(1.0, -lambda);
        std::mt19937_64 rng(seed);
        rep.coercivity_slack = inf;
        for (int s = 0; s < samples; ++s) {
            const Vector g = random_vector(rng, m);
            const Vector ug = dtn_extension(sys, lambda, g);
            const double vn = v_norm(sys, ug);
            rep.coercivity_slack = std::min(rep.coercivity_slack, g.dot(D * g) - c * vn * vn);
        }
    }
    try {
        const Matrix D0 = dtn_assemble(sys, 0.0);
        rep.constant_residual = (D0 * Vector::Ones(m)).norm() / std::max(D0.norm(), 1e-300);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::shift_rejected) throw;
        rep.constant_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

TraceBand trace_band(const KernelSpec& k, const DomainSpec& dom, double h, double r_trunc, unsigned seed,
                     int samples, int threads) {
    auto space = std::make_shared<const DiscreteSpace>(build_mesh(dom, k, h, r_trunc));
    AssembleOptions ao;
    ao.threads = threads;
    const auto sys = assemble(space, k, ao);
    const Matrix DK = assemble_trace_DK(*space, k);
    const auto T = space->trace();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    TraceBand band{h, sys.size(), inf, 0.0};
    for (int s = 0; s < samples; ++s) {
        double c[4];
        for (auto& x : c) x = U(rng);
        const Vector all = space->interpolate(
            [&](double y) { return c[0] + c[1] * std::sin(y) + c[2] * std::cos(2.0 * y) + c[3] / (1.0 + y * y); });
        Vector vt(T.size());
        for (std::size_t i = 0; i < T.size(); ++i) vt[i] = all[T[i]];
        const double q = trace_quotient_norm(sys, vt);
        const double dk = vt.dot(DK * vt);
        const double r = q * q / dk;
        band.r_min = std::min(band.r_min, r);
        band.r_max = std::max(band.r_max, r);
    }
    return band;
}

int horizon_sparsity_violations(const AssembledSystem& sys) {
    const auto& sp = *sys.space;
    const double delta = sys.kernel->support_radius();
    if (!std::isfinite(delta)) return 0;
    const int n = sys.size();
    std::vector<double> lo(n, inf), hi(n, -inf);
    for (const auto& el : sp.mesh.elements)
        for (int v : el.nodes) {
            lo[v] = std::min(lo[v], el.left);
            hi[v] = std::max(hi[v], el.right);
        }
    const double tiny = 1e-14 * sys.A.cwiseAbs().maxCoeff();
    int bad = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == sp.far_dof || j == sp.far_dof || std::abs(sys.A(i, j)) <= tiny) continue;
            const double gap = std::max({0.0, lo[j] - hi[i], lo[i] - hi[j]});
            if (gap > delta * (1.0 + 1e-12)) ++bad;
        }
    return bad;
}

// ---------------------------------------------------------------------------
// experiments

namespace {

std::vector<double> list(const json& j) { return j.get<std::vector<double>>(); }

std::shared_ptr<const AssembledSystem> build(const ExperimentConfig& cfg, const KernelSpec& k, double h, int threads) {
    auto space = std::make_shared<const DiscreteSpace>(build_mesh(cfg.domain, k, h, cfg.r_trunc));
    AssembleOptions ao;
    ao.rule = cfg.rule;
    ao.threads = threads;
    return std::make_shared<const AssembledSystem>(assemble(space, k, ao));
}

const char* kind_name(DofKind k) {
    switch (k) {
        case DofKind::interior: return "interior";
        case DofKind::interface: return "interface";
        case DofKind::complement: return "complement";
    }
    return "";
}

Table solution_table(const AssembledSystem& sys, const Vector& u, const std::string& name = "solution") {
    const auto& sp = *sys.space;
    Table t{name, {"dof", "x", "kind", "u"}, {}};
    for (int i = 0; i < sp.size(); ++i) {
        const bool far = i == sp.far_dof;
        t.rows.push_back({i, far ? json("far") : json(sp.mesh.vertices[i]), far ? "far" : kind_name(sp.kind[i]), u[i]});
    }
    return t;
}

json gauss_green_json(const GaussGreenReport& g) {
    return {{"null_space", g.null_space},
            {"pair_residual", g.pair_residual},
            {"balance_residual", g.balance_residual},
            {"pairs", g.pairs},
            {"residual", std::max(g.pair_residual, g.balance_residual)}};
}

json manufactured_json(const std::vector<ManufacturedRow>& rows, Table& t) {
    t = Table{"convergence", {"h", "dofs", "l2_error", "defect", "residual"}, {}};
    bool decreasing = rows.size() >= 2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.rows.push_back({r.h, r.dofs, r.l2_error, r.defect, r.residual});
        if (i > 0) decreasing = decreasing && r.l2_error < rows[i - 1].l2_error;
    }
    json j = json::array();
    for (const auto& r : rows) j.push_back({{"h", r.h}, {"dofs", r.dofs}, {"l2_error", r.l2_error}, {"defect", r.defect}});
    return {{"rows", j}, {"decreasing", decreasing}};
}

ExperimentResult run_assemble_check(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto& fast = *out.system;
    if (fast.size() > oracle_dof_budget)
        throw Error(ErrorCode::budget_exceeded,
                    "assemble-check needs at most " + std::to_string(oracle_dof_budget) + " DOFs, mesh has " +
                        std::to_string(fast.size()));
    const auto ref = dense_reference(fast.space, cfg.kernel);
    const double tol = cfg.params["tolerance"].get<double>();
    Table t{"matrices", {"matrix", "max_rel_error", "max_abs"}, {}};
    double worst = 0.0;
    auto compare = [&](const char* name, const Matrix& a, const Matrix& b) {
        const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
        double e = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) {
                // entries below 1e-4 of the matrix scale (some cancel to zero) use that floor
                const double d = std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), 1e-4 * scale);
                e = std::max(e, d);
            }
        t.rows.push_back({name, e, scale});
        worst = std::max(worst, e);
    };
    compare("A", fast.A, ref.A);
    compare("A_inner", fast.A_inner, ref.A_inner);
    compare("A_cross", fast.A_cross, ref.A_cross);
    compare("P", fast.P, ref.P);
    compare("N", fast.N_op, ref.N_op);
    compare("M", fast.M, ref.M);
    compare("M_tilde", fast.M_tilde, ref.M_tilde);
    out.summary = {{"dofs", fast.size()}, {"max_rel_error", worst}, {"tolerance", tol}, {"pass", worst <= tol}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_gauss_green(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto g = gauss_green_check(*out.system, cfg.seed, cfg.params["pairs"].get<int>());
    out.summary = gauss_green_json(g);
    out.summary["dofs"] = out.system->size();
    out.summary["pass"] = g.null_space <= 1e-10 && std::max(g.pair_residual, g.balance_residual) <= 1e-9;
    return out;
}

ExperimentResult run_solve(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    const auto& p = cfg.params;
    const std::string variant = p["variant"];
    const auto f = parse_field(p["f"], "params.f");
    const auto g = parse_field(p["g"], "params.g");
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto& sys = *out.system;
    SolveReport rep;
    if (variant == "neumann") rep = solve_neumann(sys, f.value, g.value);
    else if (variant == "neumann-weighted") rep = solve_neumann_weighted(sys, f.value, g.value);
    else if (variant == "dirichlet") rep = solve_dirichlet(sys, f.value, g.value);
    else rep = solve_robin(sys, f.value, g.value, parse_field(p["beta"], "params.beta").value);
    json s = rep.to_json();
    s.erase("coefficients");
    out.summary = {{"variant", variant}, {"dofs", sys.size()}, {"report", s}};
    out.tables.push_back(solution_table(sys, rep.u));
    const auto hs = list(p["refinements"]);
    if (!hs.empty()) {
        Table t;
        out.summary["manufactured"] =
            manufactured_json(manufactured_study(cfg.kernel, cfg.domain, parse_field(p["phi"], "params.phi"), hs,
                                                 cfg.r_trunc, threads),
                              t);
        out.tables.push_back(std::move(t));
    }
    return out;
}

ExperimentResult run_eig(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto& sys = *out.system;
    const std::string variant = cfg.params["variant"];
    const int count = std::min<int>(cfg.params["count"].get<int>(), static_cast<int>(sys.space->closure().size()));
    EigenPairs pairs;
    if (variant == "robin") {
        const Matrix Mb = beta_mass(*sys.space, parse_field(cfg.params["beta"], "params.beta").value);
        pairs = eig(sys, EigVariant::robin, count, &Mb);
    } else {
        pairs = eig(sys, variant == "neumann" ? EigVariant::neumann : EigVariant::dirichlet, count);
    }
    Table vals{"eigenvalues", {"index", "value"}, {}};
    for (int i = 0; i < count; ++i) vals.rows.push_back({i, pairs.values[i]});
    Table vecs{"eigenvectors", {"dof", "x"}, {}};
    for (int i = 0; i < count; ++i) vecs.columns.push_back("v" + std::to_string(i));
    const auto& sp = *sys.space;
    for (int r = 0; r < sp.size(); ++r) {
        std::vector<json> row{r, r == sp.far_dof ? json("far") : json(sp.mesh.vertices[r])};
        for (int i = 0; i < count; ++i) row.push_back(pairs.vectors(r, i));
        vecs.rows.push_back(std::move(row));
    }
    std::vector<double> v(pairs.values.data(), pairs.values.data() + count);
    out.summary = {{"variant", variant},
                   {"dofs", sys.size()},
                   {"eigenvalues", v},
                   {"max_residual", pairs.max_residual},
                   {"eigenvalues_file", "eigenvalues.csv"},
                   {"eigenvectors_file", "eigenvectors.csv"}};
    out.tables.push_back(std::move(vals));
    out.tables.push_back(std::move(vecs));
    return out;
}

ExperimentResult run_poincare(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto& sys = *out.system;
    const auto pc = poincare_constant(sys, cfg.seed, cfg.params["probes"].get<int>());
    const double lambda1 = eig(sys, EigVariant::dirichlet, 1).values[0];
    const double tail = tail_mass(cfg.kernel, cfg.domain.diameter());
    out.summary = {{"dofs", sys.size()},
                   {"poincare_constant", pc.constant},
                   {"mu1", pc.mu1},
                   {"min_slack", pc.min_slack},
                   {"probes", pc.probes},
                   {"dirichlet_lambda1", lambda1},
                   {"tail_mass_diameter", tail},
                   {"friedrichs_bound", 2.0 * tail},
                   {"friedrichs_pass", lambda1 >= 2.0 * tail - 1e-10},
                   {"single_tail_pass", lambda1 >= tail - 1e-10}};
    return out;
}

ExperimentResult run_robin(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const auto rows = robin_trend(*out.system, parse_field(cfg.params["f"], "params.f").value, list(cfg.params["betas"]));
    Table t{"robin", {"beta", "l2_distance", "residual"}, {}};
    bool decreasing = rows.size() >= 2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.rows.push_back({rows[i].beta, rows[i].distance, rows[i].residual});
        if (i > 0) decreasing = decreasing && rows[i].distance < rows[i - 1].distance;
    }
    out.summary = {{"dofs", out.system->size()}, {"strictly_decreasing", decreasing}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_dtn(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const double lambda = cfg.params["lambda"].get<double>();
    const auto c = dtn_check(*out.system, lambda, cfg.seed, cfg.params["samples"].get<int>());
    out.summary = {{"dofs", out.system->size()},
                   {"lambda", lambda},
                   {"symmetry", c.symmetry},
                   {"coercivity_slack", num(c.coercivity_slack)},
                   {"constant_residual", num(c.constant_residual)},
                   {"samples", c.samples}};
    return out;
}

ExperimentResult run_dtn_spectral(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    out.system = build(cfg, cfg.kernel, cfg.h, threads);
    const Field beta = parse_field(cfg.params["beta"], "params.beta").value;
    Table t{"dtn_spectral", {"scale", "gamma1", "sigma_min", "norm_D", "pass", "inconclusive", "kernel_dimension"}, {}};
    json rows = json::array();
    bool all = true;
    for (double s : list(cfg.params["scales"])) {
        const auto rep = dtn_spectral_check(*out.system, [&](double y) { return s * beta(y); });
        t.rows.push_back({s, rep.gamma1, rep.sigma_min, rep.norm_D, rep.pass, rep.inconclusive, rep.kernel_dimension});
        json j = rep.to_json();
        j["scale"] = s;
        rows.push_back(j);
        all = all && rep.pass;
    }
    out.summary = {{"dofs", out.system->size()}, {"checks", rows}, {"pass", all}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_trace_compare(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    Table t{"trace_band", {"h", "dofs", "r_min", "r_max"}, {}};
    double lo_min = inf, lo_max = 0.0, hi_min = inf, hi_max = 0.0;
    for (double h : list(cfg.params["levels"])) {
        const auto b = trace_band(cfg.kernel, cfg.domain, h, cfg.r_trunc, cfg.seed, cfg.params["samples"].get<int>(), threads);
        t.rows.push_back({b.h, b.dofs, b.r_min, b.r_max});
        lo_min = std::min(lo_min, b.r_min);
        lo_max = std::max(lo_max, b.r_min);
        hi_min = std::min(hi_min, b.r_max);
        hi_max = std::max(hi_max, b.r_max);
    }
    const bool positive = lo_min > 0.0 && std::isfinite(hi_max);
    out.summary = {{"r_min", lo_min},
                   {"r_max", hi_max},
                   {"endpoint_variation", {{"r_min", lo_max / lo_min}, {"r_max", hi_max / hi_min}}},
                   {"pass", positive && lo_max < 2.0 * lo_min && hi_max < 2.0 * hi_min}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_alpha_sweep(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    SweepOptions o;
    o.alphas = list(cfg.params["alphas"]);
    o.h0 = cfg.params["h0"].get<double>();
    o.r_trunc = cfg.params["r_trunc"].get<double>();
    o.threads = threads;
    const auto res = alpha_sweep(o);
    Table t{"alpha_sweep",
            {"alpha", "h", "R_trunc", "dofs", "l2_error", "energy_gap", "gauss_green_residual", "boundary_term",
             "boundary_gap", "pairing_bound", "defect"},
            {}};
    bool l2_dec = res.rows.size() >= 2, gap_dec = l2_dec;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        t.rows.push_back({r.alpha, r.h, r.r_trunc, r.dofs, r.l2_error, r.energy_gap, r.gauss_green_residual,
                          r.boundary_term, r.boundary_gap, r.pairing_bound, r.defect});
        if (i > 0) {
            l2_dec = l2_dec && r.l2_error < res.rows[i - 1].l2_error;
            gap_dec = gap_dec && r.boundary_gap < res.rows[i - 1].boundary_gap;
        }
    }
    const double last = res.rows.empty() ? inf : res.rows.back().l2_error;
    out.summary = {{"local_l2", res.local_l2},
                   {"l2_decreasing", l2_dec},
                   {"boundary_gap_decreasing", gap_dec},
                   {"final_relative_error", last / res.local_l2},
                   {"pass", l2_dec && gap_dec && last <= 0.05 * res.local_l2}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_probe(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    ProbeOptions o;
    o.h = list(cfg.params["h"]);
    o.r_trunc = list(cfg.params["r_trunc"]);
    o.threads = threads;
    const auto rep = nonexistence_probe(cfg.params["alpha"].get<double>(), cfg.params["gamma"].get<double>(), o);
    Table t{"probe", {"h", "R_trunc", "dofs", "v_norm", "defect"}, {}};
    for (const auto& r : rep.rungs) t.rows.push_back({r.h, r.r_trunc, r.dofs, r.norm, r.defect});
    out.summary = rep.to_json();
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_peridynamic(const ExperimentConfig& cfg, int threads) {
    ExperimentResult out;
    const auto& p = cfg.params;
    const double delta = p["delta"].get<double>();
    const double c = p["amplitude"].is_null() ? normalized_peridynamic_amplitude(1, delta) : p["amplitude"].get<double>();
    const auto k = make_peridynamic(1, delta, c);
    out.system = build(cfg, k, cfg.h, threads);
    const auto& sys = *out.system;

    const auto gg = gauss_green_check(sys, cfg.seed, p["pairs"].get<int>());
    const auto sw = seminorm_sandwich(sys, cfg.seed, p["pairs"].get<int>());
    const auto neu = eig(sys, EigVariant::neumann, 2);
    const Vector v0 = neu.vectors.col(0);
    const double const_dev = (v0.array() - v0.mean()).abs().maxCoeff() / std::max(v0.cwiseAbs().maxCoeff(), 1e-300);
    const double lambda1 = eig(sys, EigVariant::dirichlet, 1).values[0];
    const double tail = tail_mass(k, cfg.domain.diameter());
    const auto one = solve_neumann(sys, [](double) { return 1.0; }, [](double) { return 0.0; });
    const SmoothField phi{[](double x) { return std::exp(-(x - 0.3) * (x - 0.3)); },
                          [](double x) { return -2.0 * (x - 0.3) * std::exp(-(x - 0.3) * (x - 0.3)); }};
    Table t;
    const json man = manufactured_json(manufactured_study(k, cfg.domain, phi, list(p["refinements"]), cfg.r_trunc, threads), t);
    const int sparsity = horizon_sparsity_violations(sys);

    const bool pass2 = gg.null_space <= 1e-10 && std::max(gg.pair_residual, gg.balance_residual) <= 1e-9;
    const bool pass4 = std::abs(neu.values[0]) <= 1e-10 && const_dev <= 1e-8 && neu.values[1] > 0.0 &&
                       lambda1 >= 2.0 * tail - 1e-10;
    const bool pass5 = one.residual <= 1e-9 && std::abs(one.compatibility_defect - 1.0) <= 1e-12 &&
                       man["decreasing"].get<bool>();
    out.summary = {{"delta", delta},
                   {"amplitude", c},
                   {"dofs", sys.size()},
                   {"gauss_green", gauss_green_json(gg)},
                   {"sandwich", {{"violations", sw.violations}, {"worst", sw.worst}}},
                   {"spectra",
                    {{"mu0", neu.values[0]},
                     {"mu1", neu.values[1]},
                     {"constant_deviation", const_dev},
                     {"dirichlet_lambda1", lambda1},
                     {"friedrichs_bound", 2.0 * tail}}},
                   {"well_posedness",
                    {{"residual", one.residual}, {"defect_f_one", one.compatibility_defect}, {"manufactured", man}}},
                   {"sparsity_violations", sparsity},
                   {"pass", {{"gauss_green", pass2}, {"spectra", pass4}, {"well_posedness", pass5}, {"sparsity", sparsity == 0}}}};
    out.tables.push_back(std::move(t));
    return out;
}

ExperimentResult run_weights(const ExperimentConfig& cfg, int) {
    ExperimentResult out;
    const auto& p = cfg.params;
    const double max_abs = p["max_abs"].get<double>();
    const int n = p["samples"].get<int>();
    Ball base;
    if (const auto* iv = std::get_if<Interval>(&cfg.domain.shape)) {
        base.center = point1d(0.5 * (iv->a + iv->b));
        base.radius = 0.25 * (iv->b - iv->a);
    } else {
        throw Error(ErrorCode::invalid_domain, "weights-report samples the real line; use an interval domain");
    }
    if (!p["base_radius"].is_null()) base.radius = p["base_radius"].get<double>();
    std::vector<Point> samples;
    for (int i = 0; i < n; ++i) samples.push_back(point1d(n == 1 ? 0.0 : -max_abs + 2.0 * max_abs * i / (n - 1)));
    const auto rep = comparability_report(cfg.kernel, base, p["radius"].get<double>(), samples);
    const auto dbl = check_doubling(cfg.kernel);
    const auto deltas = list(p["deltas"]);
    const auto cls = class_diagnostics(cfg.kernel, cfg.domain, deltas);

    Table ratios{"ratios", {"numerator", "denominator", "min", "max"}, {}};
    for (const auto& r : rep.ratios) ratios.rows.push_back({r.numerator, r.denominator, r.min, r.max});
    for (const auto& r : rep.profile_bands) ratios.rows.push_back({r.numerator, r.denominator, r.min, r.max});
    Table weights{"weights", {"x", "nu_tilde", "nu_bar", "nu_star", "min_one_nu"}, {}};
    if (rep.applicable) {
        WeightField tilde(WeightKind::nu_tilde, cfg.kernel, base, p["radius"].get<double>());
        WeightField bar(WeightKind::nu_bar, cfg.kernel, base, p["radius"].get<double>());
        WeightField star(WeightKind::nu_star, cfg.kernel, base, p["radius"].get<double>());
        for (const auto& x : samples) weights.rows.push_back({x[0], tilde(x), bar(x), star(x), min_one_nu(cfg.kernel, x)});
    }
    Table classes{"class_diagnostics", {"delta", "q", "q_tilde"}, {}};
    for (std::size_t i = 0; i < cls.deltas.size(); ++i) classes.rows.push_back({cls.deltas[i], cls.q[i], cls.q_tilde[i]});

    out.summary = rep.to_json();
    out.summary["doubling"] = {{"ok", dbl.ok}, {"c1", dbl.c1}, {"c2", dbl.c2}, {"violating_radius", dbl.violating_radius}};
    out.summary["levy_mass"] = levy_mass(cfg.kernel);
    out.summary["base"] = {{"center", base.center[0]}, {"radius", base.radius}};
    out.tables.push_back(std::move(ratios));
    if (rep.applicable) out.tables.push_back(std::move(weights));
    out.tables.push_back(std::move(classes));
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    using Runner = ExperimentResult (*)(const ExperimentConfig&, int);
    static const std::map<std::string, Runner> runners = {
        {"assemble-check", run_assemble_check}, {"gauss-green", run_gauss_green},
        {"solve", run_solve},                   {"eig", run_eig},
        {"poincare", run_poincare},             {"robin", run_robin},
        {"dtn", run_dtn},                       {"dtn-spectral", run_dtn_spectral},
        {"trace-compare", run_trace_compare},   {"alpha-sweep", run_alpha_sweep},
        {"nonexistence-probe", run_probe},      {"peridynamic", run_peridynamic},
        {"weights-report", run_weights},
    };
    const auto it = runners.find(cfg.kind);
    if (it == runners.end()) throw Error(ErrorCode::invalid_parameter, "unknown experiment " + cfg.kind);
    auto out = it->second(cfg, std::max(1, threads));
    out.summary["experiment"] = cfg.kind;
    return out;
}

}  // namespace nlcvp
