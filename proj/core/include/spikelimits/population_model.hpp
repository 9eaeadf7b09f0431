#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spikelimits/bulk_spectrum.hpp"
#include "spikelimits/spike_set.hpp"
#include "spikelimits/types.hpp"

namespace spikelimits {

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    std::string failures() const {
        std::string out;
        for (const auto& c : checks)
            if (!c.pass) out += c.name + ": " + c.detail + "; ";
        return out;
    }
};

// Generalized spiked population model. The factorization is
//   G = V Diag[Lambda_s^{1/2}, Lambda_b^{1/2}] U^T,   R = G G^T,
// with V, U orthonormal. In covariance mode the stored G plays the role of
// Gamma and R the role of Sigma; all derived matrices are immutable after
// construction and safe to share across threads.
struct PopulationModel {
    int p = 0;
    ModelMode mode = ModelMode::covariance;
    ModelStructure structure = ModelStructure::identity_embedding;
    std::uint64_t seed = 0;
    SpikeSet spikes;
    std::vector<double> bulk;  // p - M bulk eigenvalues, descending

    Eigen::VectorXd lambda;  // all p eigenvalues, descending (spikes first)
    Eigen::MatrixXd V;       // left factors, columns ordered like lambda
    Eigen::MatrixXd U;       // right factors
    Eigen::MatrixXd G;       // V Diag(lambda)^{1/2} U^T
    Eigen::MatrixXd Gb;      // bulk part V_b Lambda_b^{1/2} U_b^T
    Eigen::MatrixXd R;       // G G^T
    Eigen::MatrixXd Rb;      // Gb Gb^T

    int M() const { return spikes.M(); }
    int K() const { return spikes.K(); }
    double spike_alpha(int k) const { return spikes.spikes.at(k).alpha; }
    std::pair<int, int> spike_range(int k) const { return spikes.index_range(k); }

    auto Vs() const { return V.leftCols(M()); }
    auto Vb() const { return V.rightCols(p - M()); }
    auto Us() const { return U.leftCols(M()); }
    auto Ub() const { return U.rightCols(p - M()); }
};

// Canonical test model: R = (1-rho) I + rho J with a single spike
// alpha_1 = 1 + (p-1) rho on the equally weighted direction.
PopulationModel build_equicorrelation(int p, double rho);

PopulationModel build_general(int p, const SpikeSet& spikes, std::span<const double> bulk_eigs,
                              std::uint64_t seed, ModelMode mode, ModelStructure structure);

// Assumption checks for a model at sample size n: orthonormality, unit
// diagonal (correlation mode), bounded bulk norm, phi'(alpha_k) > 0 at
// y_n = p/n, pairwise ratio gaps. Failures are reported, never thrown.
ValidationReport validate(const PopulationModel& model, int n, double d = kDefaultSeparation);

// Discrete ESD of the p - M bulk eigenvalues (H_n), built from Lambda_b.
BulkSpectrum bulk_esd(const PopulationModel& model);

// "model_v1" JSON document; matrices are re-derived on load.
nlohmann::json model_to_json(const PopulationModel& model);
PopulationModel model_from_json(const nlohmann::json& j);

}  // namespace spikelimits
