#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spikelimits/population_model.hpp"

namespace spikelimits {

// A unit direction P with its decomposition against the model factors:
// tau = V^T P, and per spike group k the vectors
//   T_G[k] = (sum_{j in I_k} U_j V_j^T) P,
//   T_R[k] = (sum_{j in I_k} V_j V_j^T) P,
// plus Gb_P = Gb^T P.
struct ProjectionContext {
    Eigen::VectorXd P;
    Eigen::VectorXd tau;
    std::vector<Eigen::VectorXd> T_G;
    std::vector<Eigen::VectorXd> T_R;
    Eigen::VectorXd Gb_P;

    // sum of tau_j^2 over I_k
    double tau_sq(const PopulationModel& model, int k) const {
        auto [first, last] = model.spike_range(k);
        return tau.segment(first, last - first).squaredNorm();
    }
};

// Throws DomainError unless ||P|| = 1 within 1e-12.
ProjectionContext projection_context(const PopulationModel& model, const Eigen::VectorXd& P);

}  // namespace spikelimits
