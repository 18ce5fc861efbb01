#pragma once

// Config-driven experiments behind the command line tool, and the property
// checks they share with the test suite.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcvp/assembly.hpp"
#include "nlcvp/geometry.hpp"
#include "nlcvp/kernels.hpp"
#include "nlcvp/quadrature.hpp"
#include "nlcvp/types.hpp"

namespace nlcvp {

inline constexpr int config_schema_version = 1;

/// Invalid configuration; `path()` names the offending field ("params.betas[1]").
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// A smooth function of one variable with its derivative.
struct SmoothField {
    Field value;
    Field derivative;
};

/// number | {"kind": "constant" | "polynomial" | "sine" | "gaussian" | "sum", ...}
SmoothField parse_field(const nlohmann::json& j, const std::string& path);

struct ExperimentConfig {
    std::string kind;
    unsigned seed = 1;
    KernelSpec kernel;
    DomainSpec domain;
    double h = 0.125;
    double r_trunc = 2.0;
    QuadRule rule;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json raw;  // the validated input with defaults filled in
};

const std::vector<std::string>& experiment_kinds();

/// Validates the document and fills defaults. Throws SchemaError.
ExperimentConfig parse_config(const nlohmann::json& j);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;  // numbers, strings or booleans

    /// Numbers at 17 significant digits.
    std::string to_csv() const;
};

struct ExperimentResult {
    nlohmann::json summary;
    std::vector<Table> tables;
    std::shared_ptr<const AssembledSystem> system;  // the main system, when there is one
};

/// Runs one experiment. Numerical failures surface as nlcvp::Error.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

// ---------------------------------------------------------------------------
// shared checks

struct GaussGreenReport {
    double null_space = 0.0;       // ||A 1||_inf / max|A|
    double pair_residual = 0.0;    // max over pairs |v'Au - v'(P+N)u| / (|A| |u| |v|)
    double balance_residual = 0.0; // max over u |1'(P+N)u| / (|A| |u|)
    int pairs = 0;
};

GaussGreenReport gauss_green_check(const AssembledSystem& sys, unsigned seed, int pairs = 100);

struct SandwichReport {
    int samples = 0;
    int violations = 0;
    double worst = 0.0;  // most negative slack, relative to u'Au
};

/// u'Su <= u'Au <= 2 u'Su on random vectors.
SandwichReport seminorm_sandwich(const AssembledSystem& sys, unsigned seed, int samples = 100);

struct ManufacturedRow {
    double h = 0.0;
    int dofs = 0;
    double l2_error = 0.0;
    double defect = 0.0;
    double residual = 0.0;
};

/// Neumann problems with f = L phi and g = N phi on a mesh ladder, against
/// phi minus its mean. One-dimensional.
std::vector<ManufacturedRow> manufactured_study(const KernelSpec& k, const DomainSpec& dom,
                                                const SmoothField& phi, const std::vector<double>& hs,
                                                double r_trunc, int threads = 1);

struct RobinRow {
    double beta = 0.0;
    double distance = 0.0;  // ||u_beta - u_D||_{L^2(Omega)}
    double residual = 0.0;
};

std::vector<RobinRow> robin_trend(const AssembledSystem& sys, const Field& f,
                                  const std::vector<double>& betas);

struct DtnCheck {
    double lambda = 0.0;
    double symmetry = 0.0;         // max |D - D'| / max |D|
    double coercivity_slack = 0.0; // min over g of g'Dg - c ||u_g||_V^2
    double constant_residual = 0.0; // ||D_0 1|| / ||D_0||, when lambda = 0 is allowed
    int samples = 0;
};

DtnCheck dtn_check(const AssembledSystem& sys, double lambda, unsigned seed, int samples = 50);

struct TraceBand {
    double h = 0.0;
    int dofs = 0;
    double r_min = 0.0;
    double r_max = 0.0;
};

/// (quotient norm)^2 / (DK norm)^2 over random smooth traces.
TraceBand trace_band(const KernelSpec& k, const DomainSpec& dom, double h, double r_trunc,
                     unsigned seed, int samples = 50, int threads = 1);

/// Nonzero stiffness entries whose hat supports are further apart than the
/// horizon; zero for a compactly supported kernel.
int horizon_sparsity_violations(const AssembledSystem& sys);

}  // namespace nlcvp
