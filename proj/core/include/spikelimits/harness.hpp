#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spikelimits/population_model.hpp"
#include "spikelimits/sim_engine.hpp"
#include "spikelimits/source_distribution.hpp"
#include "spikelimits/types.hpp"

namespace spikelimits {

struct NamedProjection {
    std::string name;
    Eigen::VectorXd vector;
};

// Resolve a symbolic projection ("V1", "e3", "orthogonal") or an explicit
// {"name":..., "vector":[...]} entry against a model.
NamedProjection resolve_projection(const PopulationModel& model, const nlohmann::json& entry);

struct ExperimentConfig {
    nlohmann::json raw;  // canonical source document, hashed for provenance
    PopulationModel model;
    int n = 0;
    int reps = 0;
    SourceDistribution dist;
    std::vector<MatrixKind> kinds;
    std::vector<NamedProjection> projections;
    std::uint64_t master_seed = 0;

    static ExperimentConfig from_json(const nlohmann::json& j);
    std::string config_hash() const;
};

// One comparison target for summarize(). The normalized statistic is
// scale * (x - center) and its CLT law is N(0, variance).
struct StatTarget {
    std::string name;
    MatrixKind kind = MatrixKind::covariance_matrix;
    std::string type;     // "theta" | "theta_sum" | "projection"
    int spike = 0;        // 0-based group index
    int projection = -1;  // index into config projections, for type=="projection"
    double center = 0.0;
    double scale = 1.0;
    double variance = 0.0;
};

struct TheoryBundle {
    std::vector<double> phi;  // per spike group, finite-n plug-in centering
    std::vector<StatTarget> targets;
};

// CLT targets for every statistic the config produces. Throws (e.g.
// BelowPhaseTransition) before any simulation if the theory is undefined.
TheoryBundle build_theory(const ExperimentConfig& config);

// Monte Carlo fan-out: reps records per kind, rep-major order, derived
// per-rep seeds. Thread count is capped by SPIKE_LIMITS_THREADS; outputs do
// not depend on it. Throws DomainError carrying the report if validation
// fails.
std::vector<ReplicationRecord> run(const ExperimentConfig& config);

struct StatSummary {
    StatTarget target;
    int count = 0;
    double emp_mean = 0.0;      // mean of the raw statistic
    double emp_variance = 0.0;  // sample variance of the normalized statistic
    double z_mean = 0.0;
    double variance_ratio = -1.0;
    double ks = -1.0;
    double ks_critical = 0.0;
    bool degenerate = false;  // theory variance ~ 0
    bool mean_pass = false;
    bool variance_checked = false;
    bool variance_pass = true;
    bool ks_checked = false;
    bool ks_pass = true;
    bool pass = false;
};

struct SummaryReport {
    int n = 0;
    int reps = 0;
    std::uint64_t master_seed = 0;
    std::string config_hash;
    std::vector<StatSummary> stats;
    bool all_pass = false;

    nlohmann::json to_json() const;
};

// Moments via one-pass accumulation in rep-index order; KS against the
// normal CDF with the theoretical variance. Pass criteria: |z| <= 4 for
// means, variance ratio in [0.8, 1.25] at reps >= 500, KS <= 1.358/sqrt(reps).
// Throws InsufficientData below 30 records per statistic.
SummaryReport summarize(const std::vector<ReplicationRecord>& records,
                        const ExperimentConfig& config, const TheoryBundle& theory);

struct NormalizationComparison {
    double phi_cov = 0.0;
    double phi_corr = 0.0;
    bool first_order_equal = false;
    double var_theta_cov = 0.0;   // empirical
    double var_theta_corr = 0.0;  // empirical
    double empirical_delta = 0.0;
    double theory_var_cov = 0.0;
    double theory_var_corr = 0.0;
    double effective_term = 0.0;
    double full_delta = 0.0;
    bool sign_agreement = false;

    nlohmann::json to_json() const;
};

// Paired S-versus-R_hat comparison for a unit-diagonal single-spike model;
// needs both kinds enabled in the config.
NormalizationComparison compare_normalization(const ExperimentConfig& config,
                                              const std::vector<ReplicationRecord>& records);

// Writers: plain deterministic text, provenance stamped in a comment line.
std::string records_to_csv(const std::vector<ReplicationRecord>& records,
                           const ExperimentConfig& config);
std::string plot_data_to_csv(const std::vector<ReplicationRecord>& records,
                             const ExperimentConfig& config, const TheoryBundle& theory);

}  // namespace spikelimits
