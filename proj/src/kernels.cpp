#include "nlcvp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlcvp/error.hpp"
#include "nlcvp/geometry.hpp"
#include "nlcvp/integrate.hpp"

namespace nlcvp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(ErrorCode::invalid_parameter, msg);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::fractional: return "fractional";
        case KernelFamily::peridynamic: return "peridynamic";
        case KernelFamily::rescaled: return "rescaled";
        case KernelFamily::custom: return "custom";
    }
    return "unknown";
}

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::nu_tilde: return "nu_tilde";
        case WeightKind::nu_bar: return "nu_bar";
        case WeightKind::nu_star: return "nu_star";
        case WeightKind::nu_hat: return "nu_hat";
    }
    return "unknown";
}

double sphere_area(int d) {
    if (d == 1) return 2.0;
    if (d == 2) return 2.0 * std::numbers::pi;
    throw Error(ErrorCode::invalid_parameter, "dimension must be 1 or 2");
}

// ---------------------------------------------------------------------------
// KernelSpec

double KernelSpec::raw(double r) const {
    switch (family_) {
        case KernelFamily::fractional:
            return fractional_constant_ * std::pow(r, -dim_ - alpha_);
        case KernelFamily::peridynamic:
            return r <= horizon_ ? amplitude_ : 0.0;
        case KernelFamily::rescaled: {
            const double eps = 2.0 - alpha_;
            const double z = r / eps;
            const double scale = std::pow(eps, -dim_);
            if (r <= eps) return scale * (*base_)(z) / (eps * eps);
            if (r <= 1.0) return scale * (*base_)(z) / (r * r);
            return scale * (*base_)(z);
        }
        case KernelFamily::custom:
            return r <= support_ ? profile_(r) : 0.0;
    }
    return 0.0;
}

double KernelSpec::operator()(double r) const { return normalization_ * raw(r); }

bool KernelSpec::has_full_support() const { return std::isinf(support_); }

std::optional<PowerLawCore> KernelSpec::power_law_core() const {
    switch (family_) {
        case KernelFamily::fractional:
            return PowerLawCore{normalization_ * fractional_constant_, alpha_, inf};
        case KernelFamily::peridynamic:
            return PowerLawCore{normalization_ * amplitude_, -static_cast<double>(dim_), horizon_};
        case KernelFamily::rescaled: {
            auto core = base_->power_law_core();
            if (!core) return std::nullopt;
            const double eps = 2.0 - alpha_;
            const double beta = core->order;
            // eps^{-d-2} C (r/eps)^{-d-beta} = C eps^{beta-2} r^{-d-beta}
            return PowerLawCore{normalization_ * core->coefficient * std::pow(eps, beta - 2.0), beta,
                                eps * std::min(1.0, core->radius)};
        }
        case KernelFamily::custom:
            if (custom_core_) {
                auto c = *custom_core_;
                c.coefficient *= normalization_;
                return c;
            }
            return std::nullopt;
    }
    return std::nullopt;
}

std::vector<double> KernelSpec::breakpoints() const {
    std::vector<double> out;
    switch (family_) {
        case KernelFamily::fractional: break;
        case KernelFamily::peridynamic: out.push_back(horizon_); break;
        case KernelFamily::rescaled: {
            const double eps = 2.0 - alpha_;
            out.push_back(eps);
            out.push_back(1.0);
            for (double b : base_->breakpoints()) out.push_back(eps * b);
            break;
        }
        case KernelFamily::custom:
            if (std::isfinite(support_)) out.push_back(support_);
            if (custom_core_ && std::isfinite(custom_core_->radius)) out.push_back(custom_core_->radius);
            break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [](double b) { return !(b > 0.0) || !std::isfinite(b); });
    return out;
}

KernelSpec KernelSpec::scaled(double factor) const {
    require(factor > 0.0 && std::isfinite(factor), "normalization factor must be positive");
    KernelSpec k = *this;
    k.normalization_ *= factor;
    return k;
}

std::string KernelSpec::id() const {
    std::ostringstream os;
    os << to_string(family_) << "(d=" << dim_;
    switch (family_) {
        case KernelFamily::fractional: os << ",alpha=" << fmt(alpha_); break;
        case KernelFamily::peridynamic:
            os << ",delta=" << fmt(horizon_) << ",c=" << fmt(amplitude_);
            break;
        case KernelFamily::rescaled: os << ",alpha=" << fmt(alpha_) << ",base=" << base_->id(); break;
        case KernelFamily::custom: os << ",name=" << custom_name_; break;
    }
    if (normalization_ != 1.0) os << ",scale=" << fmt(normalization_);
    os << ")";
    return os.str();
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json params = nlohmann::json::object();
    switch (family_) {
        case KernelFamily::fractional: params["alpha"] = alpha_; break;
        case KernelFamily::peridynamic:
            params["delta"] = horizon_;
            params["c"] = amplitude_;
            break;
        case KernelFamily::rescaled:
            params["alpha"] = alpha_;
            params["base"] = base_->to_json();
            break;
        case KernelFamily::custom:
            params = custom_params_;
            params["name"] = custom_name_;
            break;
    }
    if (normalization_ != 1.0) params["scale"] = normalization_;
    return {{"family", to_string(family_)}, {"d", dim_}, {"params", params}};
}

namespace {

double get_number(const nlohmann::json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw Error(ErrorCode::invalid_parameter, path + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

}  // namespace

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_parameter, "kernel: expected an object");
    if (!j.contains("family") || !j.at("family").is_string())
        throw Error(ErrorCode::invalid_parameter, "kernel.family: expected a string");
    const int d = j.contains("d") ? j.at("d").get<int>() : 1;
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    const std::string family = j.at("family").get<std::string>();
    KernelSpec k;
    if (family == "fractional") {
        k = make_fractional(d, get_number(params, "alpha", "kernel.params"));
    } else if (family == "peridynamic") {
        const double delta = get_number(params, "delta", "kernel.params");
        const double c = params.contains("c") ? get_number(params, "c", "kernel.params")
                                              : normalized_peridynamic_amplitude(d, delta);
        k = make_peridynamic(d, delta, c);
    } else if (family == "rescaled") {
        if (!params.contains("base"))
            throw Error(ErrorCode::invalid_parameter, "kernel.params.base: missing");
        k = make_rescaled(from_json(params.at("base")), get_number(params, "alpha", "kernel.params"));
    } else if (family == "custom") {
        if (!params.contains("name") || !params.at("name").is_string())
            throw Error(ErrorCode::invalid_parameter, "kernel.params.name: expected a string");
        k = make_named_custom(d, params.at("name").get<std::string>(), params);
    } else {
        throw Error(ErrorCode::invalid_parameter, "kernel.family: unknown family '" + family + "'");
    }
    if (params.contains("scale")) k = k.scaled(get_number(params, "scale", "kernel.params"));
    return k;
}

// ---------------------------------------------------------------------------
// factories

KernelSpec make_fractional(int d, double alpha) {
    require(d == 1 || d == 2, "dimension must be 1 or 2");
    require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2), got " + fmt(alpha));
    KernelSpec k;
    k.dim_ = d;
    k.family_ = KernelFamily::fractional;
    k.alpha_ = alpha;
    k.support_ = inf;
    k.unimodal_ = true;
    k.singularity_ = alpha;
    k.fractional_constant_ = d * alpha * (2.0 - alpha) / (2.0 * sphere_area(d));
    return k;
}

KernelSpec make_peridynamic(int d, double horizon, double amplitude) {
    require(d == 1 || d == 2, "dimension must be 1 or 2");
    require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive and finite");
    require(amplitude >= 0.0 && std::isfinite(amplitude), "amplitude must be nonnegative");
    KernelSpec k;
    k.dim_ = d;
    k.family_ = KernelFamily::peridynamic;
    k.horizon_ = horizon;
    k.amplitude_ = amplitude;
    k.support_ = horizon;
    k.unimodal_ = true;
    k.singularity_ = -d;
    return k;
}

double normalized_peridynamic_amplitude(int d, double horizon) {
    // |S^{d-1}| int_0^delta r^{d-1} (1 ^ r^2) dr
    const double s = sphere_area(d);
    double m;
    if (horizon <= 1.0) {
        m = s * std::pow(horizon, d + 2) / (d + 2);
    } else {
        m = s * (1.0 / (d + 2) + (std::pow(horizon, d) - 1.0) / d);
    }
    return d / m;
}

KernelSpec make_rescaled(const KernelSpec& base, double alpha) {
    require(alpha > 0.0 && alpha < 2.0, "alpha must lie in (0, 2), got " + fmt(alpha));
    const double mass = levy_mass(base);
    const int d = base.dimension();
    if (std::abs(mass - d) > 1e-8 * d) {
        throw Error(ErrorCode::invalid_parameter,
                    "base kernel is not normalized: Levy mass " + fmt(mass) + " != " +
                        std::to_string(d));
    }
    KernelSpec k;
    k.dim_ = d;
    k.family_ = KernelFamily::rescaled;
    k.alpha_ = alpha;
    k.base_ = std::make_shared<const KernelSpec>(base);
    const double eps = 2.0 - alpha;
    k.support_ = base.has_full_support() ? inf : eps * base.support_radius();
    k.unimodal_ = base.unimodal();
    k.singularity_ = base.singularity_order();
    return k;
}

KernelSpec make_custom(int d, KernelSpec::Profile profile, double singularity_hint,
                       double support_radius, bool unimodal, std::string name) {
    require(d == 1 || d == 2, "dimension must be 1 or 2");
    require(static_cast<bool>(profile), "custom kernel needs a profile");
    require(singularity_hint < 2.0, "singularity exponent hint must be < 2");
    require(support_radius > 0.0, "support radius must be positive");
    KernelSpec k;
    k.dim_ = d;
    k.family_ = KernelFamily::custom;
    k.profile_ = std::move(profile);
    k.singularity_ = singularity_hint;
    k.support_ = support_radius;
    k.unimodal_ = unimodal;
    k.custom_name_ = std::move(name);
    return k;
}

KernelSpec make_named_custom(int d, const std::string& name, const nlohmann::json& params) {
    auto num = [&](const char* key, double fallback) {
        if (!params.contains(key)) return fallback;
        if (!params.at(key).is_number())
            throw Error(ErrorCode::invalid_parameter,
                        std::string("kernel.params.") + key + ": expected a number");
        return params.at(key).get<double>();
    };
    KernelSpec k;
    nlohmann::json stored = nlohmann::json::object();
    if (name == "gaussian") {
        const double c = num("c", 1.0);
        k = make_custom(d, [c](double r) { return c * std::exp(-r * r); }, -d, inf, true, name);
        stored["c"] = c;
    } else if (name == "truncated_power") {
        const double s = num("s", 1.0);
        const double rho = num("rho", 7.0);
        require(s < 2.0, "truncated_power: s must be < 2");
        require(rho > 0.0, "truncated_power: rho must be positive");
        k = make_custom(d, [d, s](double r) { return std::pow(r, -d - s); }, s, rho, true, name);
        k.custom_core_ = PowerLawCore{1.0, s, rho};
        stored["s"] = s;
        stored["rho"] = rho;
    } else if (name == "oscillating") {
        k = make_custom(
            d,
            [d](double r) {
                const double r4 = r * r * r * r;
                return std::pow(r, -d - 1.0) * std::pow((2.0 + std::cos(r)) / 3.0, r4);
            },
            1.0, inf, false, name);
    } else {
        throw Error(ErrorCode::invalid_parameter, "kernel.params.name: unknown custom profile '" +
                                                      name + "'");
    }
    k.custom_params_ = stored;
    return k;
}

// ---------------------------------------------------------------------------
// radial integrals

double radial_integral(const KernelSpec& k, const std::function<double(double)>& g, double lo,
                       double hi, double zero_power, std::span<const double> extra_breaks) {
    if (!(hi > lo)) return 0.0;
    if (lo == 0.0 && !(zero_power > -1.0)) {
        throw Error(ErrorCode::divergence_detected,
                    "integrand is not integrable at the origin (power " + fmt(zero_power) + ")");
    }
    std::vector<double> cuts{lo};
    auto add = [&](double b) {
        if (b > lo && b < hi) cuts.push_back(b);
    };
    for (double b : k.breakpoints()) add(b);
    for (double b : extra_breaks) add(b);
    add(1.0);
    if (std::isfinite(k.support_radius())) hi = std::min(hi, k.support_radius());
    std::erase_if(cuts, [&](double c) { return c >= hi; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(hi);

    double total = 0.0, error = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        integrate::Estimate e;
        if (a == 0.0) {
            // r = t^p with p = 1/(1+zero_power) turns r^zero_power dr into a
            // bounded density in t.
            const double p = 1.0 / (1.0 + zero_power);
            auto sub = [&](double t) {
                if (t <= 0.0) return 0.0;
                const double r = std::pow(t, p);
                const double v = g(r) * p * r / t;
                // the density is bounded in t, so a non-finite value near the
                // origin is overflow in the kernel; the piece is negligible there
                return (r < 1e-8 && !std::isfinite(v)) ? 0.0 : v;
            };
            e = integrate::tanh_sinh(sub, 0.0, std::pow(b, 1.0 + zero_power), 1e-14);
        } else if (std::isinf(b)) {
            e = integrate::exp_sinh(g, a, 1e-14);
        } else {
            e = integrate::tanh_sinh(g, a, b, 1e-14);
        }
        if (!std::isfinite(e.value))
            throw Error(ErrorCode::quadrature_failure,
                        "radial integral on [" + fmt(a) + ", " + fmt(b) + "] is not finite");
        total += e.value;
        error += e.error;
        l1 += e.l1;
    }
    // integrands at rounding level (second differences of linear data) settle at any size
    if (error > 1e-6 * l1 + 1e-18) {
        throw Error(ErrorCode::quadrature_failure, "radial integral on [" + fmt(lo) + ", " + fmt(hi) +
                                                       "] did not settle (error " + fmt(error) + ")");
    }
    return total;
}

double radial_integral(const KernelSpec& k, const std::function<double(double)>& g, double lo,
                       double hi, double zero_power) {
    return radial_integral(k, g, lo, hi, zero_power, {});
}

namespace {

// Dyadic shells far from the origin and close to it must shrink for the
// Levy integral to converge.
bool shells_settle(const std::function<double(double)>& g) {
    auto shell = [&](double a) { return integrate::gauss(g, a, 2.0 * a); };
    double prev = shell(std::ldexp(1.0, 30));
    for (int j = 31; j <= 34; ++j) {
        const double cur = shell(std::ldexp(1.0, j));
        if (!std::isfinite(cur) || (cur > 0.0 && cur > 0.999 * prev)) return false;
        prev = cur;
    }
    prev = shell(std::ldexp(1.0, -31));
    for (int j = 32; j <= 35; ++j) {
        const double cur = shell(std::ldexp(1.0, -j));
        if (!std::isfinite(cur) || (cur > 0.0 && cur > 0.999 * prev)) return false;
        prev = cur;
    }
    return true;
}

}  // namespace

double levy_mass(const KernelSpec& k) {
    const int d = k.dimension();
    const double area = sphere_area(d);
    auto g = [&](double r) { return std::pow(r, d - 1) * std::min(1.0, r * r) * k(r); };
    const double zero_power = 1.0 - k.singularity_order();
    if (!(zero_power > -1.0)) {
        throw Error(ErrorCode::divergence_detected,
                    "kernel singularity order " + fmt(k.singularity_order()) + " is not below 2");
    }
    double value;
    try {
        value = area * radial_integral(k, g, 0.0, inf, zero_power);
    } catch (const Error& e) {
        throw Error(ErrorCode::divergence_detected, std::string("Levy mass: ") + e.what());
    }
    if (!std::isfinite(value) || (k.has_full_support() && !shells_settle(g))) {
        throw Error(ErrorCode::divergence_detected, "Levy mass partial sums do not settle");
    }
    return value;
}

double tail_mass(const KernelSpec& k, double R) {
    require(R > 0.0, "tail radius must be positive");
    if (R >= k.support_radius()) return 0.0;
    const int d = k.dimension();
    if (auto core = k.power_law_core(); core && std::isinf(core->radius)) {
        return sphere_area(d) * core->coefficient * std::pow(R, -core->order) / core->order;
    }
    auto g = [&](double r) { return std::pow(r, d - 1) * k(r); };
    return sphere_area(d) * radial_integral(k, g, R, inf, 0.0);
}

double one_sided_tail(const KernelSpec& k, double s) {
    require(s > 0.0, "tail start must be positive");
    if (s >= k.support_radius()) return 0.0;
    if (auto core = k.power_law_core(); core && std::isinf(core->radius)) {
        const double p = k.dimension() + core->order - 1.0;
        return core->coefficient * std::pow(s, -p) / p;
    }
    return radial_integral(k, [&](double r) { return k(r); }, s, inf, 0.0);
}

std::optional<double> unit_crossing(const KernelSpec& k) {
    double lo = 1e-12;
    double hi = 1e12;
    if (std::isfinite(k.support_radius())) hi = k.support_radius();
    const double at_lo = k(lo);
    const double at_hi = k(hi * (1.0 - 1e-15));
    if (!(at_lo > 1.0) || !(at_hi < 1.0)) return std::nullopt;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (k(mid) > 1.0) lo = mid;
        else hi = mid;
        if (hi / lo < 1.0 + 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

double min_one_mass(const KernelSpec& k) {
    const int d = k.dimension();
    std::vector<double> extra;
    if (auto c = unit_crossing(k)) extra.push_back(*c);
    auto g = [&](double r) { return std::pow(r, d - 1) * std::min(1.0, k(r)); };
    return sphere_area(d) * radial_integral(k, g, 0.0, inf, d - 1.0, extra);
}

double min_one_nu(const KernelSpec& k, const Point& x) {
    const double r = x.norm();
    if (r == 0.0) return 1.0;
    return std::min(1.0, k(r));
}

// ---------------------------------------------------------------------------
// weights

WeightField::WeightField(WeightKind kind, KernelSpec kernel, Ball base, double radius)
    : kind_(kind), kernel_(std::move(kernel)), base_(base), radius_(radius) {
    require(base_.radius > 0.0, "base ball radius must be positive");
    require(radius_ > 0.0, "weight radius must be positive");
    if (auto c = unit_crossing(kernel_)) crossing_ = *c;
}

double WeightField::operator()(const Point& x) const {
    const auto key = std::make_pair(x[0], x[1]);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double v = evaluate(x);
    std::lock_guard lock(mutex_);
    cache_.emplace(key, v);
    return v;
}

double WeightField::evaluate(const Point& x) const {
    const KernelSpec& k = kernel_;
    const int d = k.dimension();
    switch (kind_) {
        case WeightKind::nu_star: return k(radius_ * (1.0 + x.norm()));
        case WeightKind::nu_hat: return k(0.5 * (1.0 + x.norm()));
        case WeightKind::nu_bar: {
            const int n = 64;
            double best = inf;
            if (d == 1) {
                const double lo = base_.center[0] - base_.radius;
                const double cell = 2.0 * base_.radius / n;
                for (int i = 0; i < n; ++i) {
                    const double y = lo + (i + 0.5) * cell;
                    best = std::min(best, k(std::abs(x[0] - y)));
                }
            } else {
                const double cell = 2.0 * base_.radius / n;
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        const Point y = base_.center +
                                        Point(-base_.radius + (i + 0.5) * cell,
                                              -base_.radius + (j + 0.5) * cell);
                        if ((y - base_.center).norm() > base_.radius) continue;
                        best = std::min(best, k((x - y).norm()));
                    }
                }
            }
            return best;
        }
        case WeightKind::nu_tilde: {
            auto m1 = [&](double r) { return r <= 0.0 ? 1.0 : std::min(1.0, k(r)); };
            if (d == 1) {
                // radial integral of min(1, nu) over the distances to B
                const double lo = base_.center[0] - base_.radius;
                const double hi = base_.center[0] + base_.radius;
                std::vector<double> extra;
                if (crossing_ > 0.0) extra.push_back(crossing_);
                if (x[0] >= lo && x[0] <= hi)
                    return radial_integral(k, m1, 0.0, x[0] - lo, 0.0, extra) +
                           radial_integral(k, m1, 0.0, hi - x[0], 0.0, extra);
                const double d1 = std::min(std::abs(x[0] - lo), std::abs(x[0] - hi));
                const double len = hi - lo;
                if (len <= 1e-6 * d1)  // far away: offsets keep the width resolved
                    return integrate::gauss([&](double s) { return m1(d1 + s); }, 0.0, len);
                return radial_integral(k, m1, d1, d1 + len, 0.0, extra);
            }
            // polar coordinates about the ball centre
            double sum = 0.0;
            const int rings = 16;
            const int sectors = 64;
            for (int i = 0; i < rings; ++i) {
                const double r0 = base_.radius * i / rings;
                const double r1 = base_.radius * (i + 1) / rings;
                for (int j = 0; j < sectors; ++j) {
                    const double t0 = 2.0 * std::numbers::pi * j / sectors;
                    const double t1 = 2.0 * std::numbers::pi * (j + 1) / sectors;
                    integrate::gauss_visit(r0, r1, [&](double r, double wr) {
                        integrate::gauss_visit(t0, t1, [&](double t, double wt) {
                            const Point y = base_.center + r * Point(std::cos(t), std::sin(t));
                            sum += wr * wt * r * m1((x - y).norm());
                        });
                    });
                }
            }
            return sum;
        }
    }
    return 0.0;
}

WeightField make_weight(WeightKind kind, const KernelSpec& k, const DomainSpec& omega, Ball base,
                        double radius) {
    if (kind == WeightKind::nu_tilde || kind == WeightKind::nu_bar) {
        if (!ball_inside(omega, base)) {
            throw Error(ErrorCode::invalid_parameter, "base ball is not contained in the domain");
        }
    }
    return WeightField(kind, k, base, radius);
}

double weight_eval(const WeightField& w, const Point& x) { return w(x); }

// ---------------------------------------------------------------------------
// structural checks

DoublingCheck check_doubling(const KernelSpec& k) {
    DoublingCheck out;
    out.c1 = inf;
    out.c2 = 0.0;
    for (double r = 1.0; 2.0 * r <= 64.0; r *= 2.0) {
        const double a = k(r);
        const double b = k(2.0 * r);
        const double ratio = (a > 0.0) ? b / a : 0.0;
        out.c1 = std::min(out.c1, ratio);
        out.c2 = std::max(out.c2, ratio);
        if (!(a > 0.0) || !(ratio >= 1e-6 && ratio <= 1e6)) {
            out.ok = false;
            out.violating_radius = r;
            return out;
        }
    }
    return out;
}

bool check_unimodal(const KernelSpec& k) {
    double prev = inf;
    for (int i = 0; i <= 2000; ++i) {
        const double r = std::pow(10.0, -4.0 + 8.0 * i / 2000.0);
        const double v = k(r);
        if (v > prev * (1.0 + 1e-12)) return false;
        prev = v;
    }
    return true;
}

nlohmann::json ComparabilityReport::to_json() const {
    nlohmann::json j;
    j["applicable"] = applicable;
    if (!reason.empty()) j["reason"] = reason;
    if (!applicable && violating_radius > 0.0) j["violating_radius"] = violating_radius;
    auto dump = [](const std::vector<RatioBound>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : v) {
            a.push_back({{"numerator", r.numerator},
                         {"denominator", r.denominator},
                         {"min", r.min},
                         {"max", r.max}});
        }
        return a;
    };
    j["ratios"] = dump(ratios);
    j["profile_bands"] = dump(profile_bands);
    j["band"] = band;
    j["profile_band"] = profile_band;
    return j;
}

ComparabilityReport comparability_report(const KernelSpec& k, const Ball& base, double R,
                                         std::span<const Point> samples) {
    require(R >= 1.0, "comparability radius must be at least 1");
    ComparabilityReport rep;
    if (!k.unimodal() || !check_unimodal(k)) {
        rep.applicable = false;
        rep.reason = "kernel is not unimodal";
        return rep;
    }
    const auto dbl = check_doubling(k);
    if (!dbl.ok) {
        rep.applicable = false;
        rep.reason = "doubling condition fails";
        rep.violating_radius = dbl.violating_radius;
        return rep;
    }
    // Sort the samples so the report does not depend on their order.
    std::vector<Point> pts(samples.begin(), samples.end());
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    WeightField tilde(WeightKind::nu_tilde, k, base, R);
    WeightField bar(WeightKind::nu_bar, k, base, R);
    WeightField star(WeightKind::nu_star, k, base, R);
    const std::array<std::string, 4> names{"nu_tilde", "nu_bar", "nu_star", "min_one_nu"};
    std::vector<std::array<double, 4>> values;
    for (const auto& x : pts) values.push_back({tilde(x), bar(x), star(x), min_one_nu(k, x)});

    auto bound = [&](const std::string& a, const std::string& b, auto&& ratio) {
        RatioBound rb{a, b, inf, 0.0};
        for (std::size_t s = 0; s < pts.size(); ++s) {
            const double r = ratio(s);
            rb.min = std::min(rb.min, r);
            rb.max = std::max(rb.max, r);
        }
        return rb;
    };
    auto widen = [](double K, const RatioBound& r) {
        if (!(r.min > 0.0) || !std::isfinite(r.max)) return inf;
        return std::max({K, r.max, 1.0 / r.min});
    };
    rep.band = 1.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            rep.ratios.push_back(
                bound(names[i], names[j], [&](std::size_t s) { return values[s][i] / values[s][j]; }));
            rep.band = widen(rep.band, rep.ratios.back());
        }
    }
    if (k.family() == KernelFamily::fractional) {
        rep.profile_band = 1.0;
        const double p = k.dimension() + k.alpha();
        for (int i = 0; i < 4; ++i) {
            rep.profile_bands.push_back(bound(names[i], "(1+|x|)^(-d-alpha)", [&](std::size_t s) {
                return values[s][i] / std::pow(1.0 + pts[s].norm(), -p);
            }));
            rep.profile_band = widen(rep.profile_band, rep.profile_bands.back());
        }
    }
    return rep;
}

ClassDiagnostics class_diagnostics(const KernelSpec& k, const DomainSpec& omega,
                                   std::span<const double> deltas) {
    ClassDiagnostics out;
    const int d = k.dimension();
    double prev = inf;
    for (double delta : deltas) {
        require(delta > 0.0 && delta < prev, "deltas must be positive and decreasing");
        prev = delta;
        out.deltas.push_back(delta);
        auto g = [&](double r) { return std::pow(r, d + 1) * k(r); };
        out.q.push_back(sphere_area(d) * radial_integral(k, g, 0.0, delta, 1.0 - k.singularity_order()) /
                        (delta * delta));
        out.q_tilde.push_back(shrunk_kernel_mass(k, omega, delta));
    }
    return out;
}

}  // namespace nlcvp
