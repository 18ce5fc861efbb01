#pragma once

// Radial Levy kernels nu(h) = profile(|h|) and the weights derived from them.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcvp/types.hpp"

namespace nlcvp {

struct DomainSpec;

enum class KernelFamily { fractional, peridynamic, rescaled, custom };

std::string to_string(KernelFamily family);

/// Exact power-law behaviour near the origin: nu(r) = coefficient * r^(-d-order)
/// for 0 < r < radius. Lets quadrature integrate the singular part in closed form.
struct PowerLawCore {
    double coefficient;
    double order;
    double radius;
};

class KernelSpec {
public:
    using Profile = std::function<double(double)>;

    int dimension() const { return dim_; }
    KernelFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    double horizon() const { return horizon_; }
    double amplitude() const { return amplitude_; }
    double support_radius() const { return support_; }
    bool unimodal() const { return unimodal_; }
    double normalization() const { return normalization_; }
    /// beta such that nu(r) ~ r^(-d-beta) near 0; -d for bounded kernels.
    double singularity_order() const { return singularity_; }
    const KernelSpec* base() const { return base_.get(); }
    const std::string& custom_name() const { return custom_name_; }

    /// Profile value nu(r) for r > 0 (normalization included).
    double operator()(double r) const;
    double at(const Point& h) const { return (*this)(h.norm()); }

    bool has_full_support() const;
    std::optional<PowerLawCore> power_law_core() const;
    /// Radii where the profile is not smooth.
    std::vector<double> breakpoints() const;

    /// Same kernel with the normalization multiplied by `factor`.
    KernelSpec scaled(double factor) const;

    std::string id() const;
    nlohmann::json to_json() const;
    static KernelSpec from_json(const nlohmann::json& j);

    friend KernelSpec make_fractional(int d, double alpha);
    friend KernelSpec make_peridynamic(int d, double horizon, double amplitude);
    friend KernelSpec make_rescaled(const KernelSpec& base, double alpha);
    friend KernelSpec make_custom(int d, Profile profile, double singularity_hint,
                                  double support_radius, bool unimodal, std::string name);
    friend KernelSpec make_named_custom(int d, const std::string& name,
                                        const nlohmann::json& params);

private:
    double raw(double r) const;

    int dim_ = 1;
    KernelFamily family_ = KernelFamily::fractional;
    double alpha_ = 0.0;
    double horizon_ = 0.0;
    double amplitude_ = 0.0;
    double support_ = 0.0;
    bool unimodal_ = true;
    double normalization_ = 1.0;
    double singularity_ = 0.0;
    double fractional_constant_ = 0.0;
    std::shared_ptr<const KernelSpec> base_;
    Profile profile_;
    std::string custom_name_;
    std::optional<PowerLawCore> custom_core_;
    nlohmann::json custom_params_;
};

/// |S^{d-1}|: 2 for d = 1, 2*pi for d = 2.
double sphere_area(int d);

/// nu(h) = a_{d,alpha} |h|^{-d-alpha}, a_{d,alpha} = d alpha (2 - alpha) / (2 |S^{d-1}|).
KernelSpec make_fractional(int d, double alpha);
/// nu = amplitude * 1_{|h| <= horizon}.
KernelSpec make_peridynamic(int d, double horizon, double amplitude);
/// Amplitude making the peridynamic kernel's Levy mass equal to d.
double normalized_peridynamic_amplitude(int d, double horizon);
/// Three-piece rescaling nu^eps with eps = 2 - alpha of a base kernel whose
/// Levy mass equals d.
KernelSpec make_rescaled(const KernelSpec& base, double alpha);
KernelSpec make_custom(int d, KernelSpec::Profile profile, double singularity_hint,
                       double support_radius, bool unimodal, std::string name = "custom");
/// Named custom profiles reachable from configuration files.
KernelSpec make_named_custom(int d, const std::string& name, const nlohmann::json& params);

/// int_lo^hi g(r) dr split at the kernel breakpoints; `hi` may be +inf. When
/// lo == 0, `zero_power` is the exponent of g near the origin (> -1) and the
/// substitution r = t^(1/(1+zero_power)) regularises the piece.
double radial_integral(const KernelSpec& k, const std::function<double(double)>& g, double lo,
                       double hi, double zero_power);
/// Same, with additional split radii.
double radial_integral(const KernelSpec& k, const std::function<double(double)>& g, double lo,
                       double hi, double zero_power, std::span<const double> extra_breaks);

/// int (1 ^ |h|^2) nu(h) dh. Throws divergence-detected when the radial
/// quadrature does not settle.
double levy_mass(const KernelSpec& k);
/// int_{|h| > R} nu(h) dh.
double tail_mass(const KernelSpec& k, double R);
/// int_s^inf nu(r) dr (one-dimensional one-sided tail).
double one_sided_tail(const KernelSpec& k, double s);
/// || 1 ^ nu ||_{L^1}.
double min_one_mass(const KernelSpec& k);

struct Ball {
    Point center = Point::Zero();
    double radius = 1.0;
};

enum class WeightKind { nu_tilde, nu_bar, nu_star, nu_hat };

std::string to_string(WeightKind kind);

/// One of the complement weights. Values are memoised behind a mutex so that
/// concurrent readers never see a partial write.
class WeightField {
public:
    WeightField(WeightKind kind, KernelSpec kernel, Ball base = {}, double radius = 2.0);

    WeightKind kind() const { return kind_; }
    const KernelSpec& kernel() const { return kernel_; }
    const Ball& base() const { return base_; }
    double radius() const { return radius_; }

    double operator()(const Point& x) const;

private:
    double evaluate(const Point& x) const;

    WeightKind kind_;
    KernelSpec kernel_;
    Ball base_;
    double radius_;
    double crossing_ = 0.0;  // radius where the profile crosses 1, if any
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, double> cache_;
};

/// Builds a weight field, checking that the base ball lies inside `omega`.
WeightField make_weight(WeightKind kind, const KernelSpec& k, const DomainSpec& omega, Ball base,
                        double radius = 2.0);

double weight_eval(const WeightField& w, const Point& x);

/// Radius where a unimodal profile crosses the value 1, if it does.
std::optional<double> unit_crossing(const KernelSpec& k);

/// min(1, nu(x)) with the value 1 at the origin.
double min_one_nu(const KernelSpec& k, const Point& x);

struct DoublingCheck {
    bool ok = true;
    double c1 = 0.0;
    double c2 = 0.0;
    double violating_radius = 0.0;
};

/// c1 nu(r) <= nu(2r) <= c2 nu(r) on the dyadic radii 1, 2, ..., 64.
DoublingCheck check_doubling(const KernelSpec& k);
/// Sampled monotonicity of the profile on a logarithmic grid.
bool check_unimodal(const KernelSpec& k);

struct RatioBound {
    std::string numerator;
    std::string denominator;
    double min = 0.0;
    double max = 0.0;
};

struct ComparabilityReport {
    bool applicable = true;
    std::string reason;
    double violating_radius = 0.0;
    std::vector<RatioBound> ratios;        // pairwise among the four weights
    std::vector<RatioBound> profile_bands; // weight / (1+|x|)^{-d-alpha}, fractional only
    double band = 0.0;                     // K with all ratios in [1/K, K]
    double profile_band = 0.0;

    nlohmann::json to_json() const;
};

ComparabilityReport comparability_report(const KernelSpec& k, const Ball& base, double R,
                                         std::span<const Point> samples);

struct ClassDiagnostics {
    std::vector<double> deltas;
    std::vector<double> q;
    std::vector<double> q_tilde;
};

/// q(delta) = delta^-2 int_{B_delta} |h|^2 nu and
/// q~(delta) = inf_{a in boundary} int_{Omega_delta} nu(h - a) dh.
ClassDiagnostics class_diagnostics(const KernelSpec& k, const DomainSpec& omega,
                                   std::span<const double> deltas);

}  // namespace nlcvp
