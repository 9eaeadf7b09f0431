#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spikelimits/population_model.hpp"
#include "spikelimits/projection.hpp"
#include "spikelimits/rmt_point.hpp"
#include "spikelimits/types.hpp"

namespace spikelimits {

// RMT scalars for spike k of a model at sample size n (y_n = p/n plug-in).
RmtPoint spike_point(const PopulationModel& model, int n, int k);

// First-order limit of the sample eigenvalues in group k: phi_{y_n,H_n}(alpha_k).
double eigenvalue_limit(const PopulationModel& model, int n, int k);

// Limiting Gaussian block for the normalized eigenvalue vector of group k.
// cov(a,b,c,d) holds Cov(G_{ab}, G_{cd}) with local indices 0..m-1.
struct CltBlock {
    MatrixKind kind = MatrixKind::covariance_matrix;
    int k = 0;  // spike group, 0-based
    int m = 1;  // multiplicity
    double nu4 = 0.0;
    std::vector<double> cov;  // m^4 entries, [(a*m+b)*m+c]*m+d

    double operator()(int a, int b, int c, int d) const {
        return cov[static_cast<std::size_t>(((a * m + b) * m + c)) * m + d];
    }
    // m^2 x m^2 matricization, rows/cols indexed by (a,b) pairs.
    Eigen::MatrixXd matricization() const;
};

CltBlock eigenvalue_clt_block(const PopulationModel& model, int n, int k, MatrixKind kind,
                              double nu4);

// K x K covariance matrix of the normalized eigenvalue statistics when all
// spikes are simple. Throws MultiplicityError otherwise.
Eigen::MatrixXd simple_spike_joint_cov(const PopulationModel& model, int n, MatrixKind kind,
                                       double nu4);

// First-order limit of P_{s,k}^T P_{s,k}: L0(alpha_k) sum_{j in I_k} tau_j^2.
double eigvec_limit(const PopulationModel& model, const Eigen::VectorXd& P, int n, int k);

// Limiting variance of sqrt(n)(P_{s,k}^T P_{s,k} - L0 sum tau^2), with the
// labeled breakdown of the V_{j,l} blocks (21 for the correlation kind,
// 6 for the covariance kind). sigma2 is exactly the accumulation
// sum_j V_{j,j} + 2 sum_{j<l} V_{j,l} over `terms` in stored order.
struct EigvecVariance {
    MatrixKind kind = MatrixKind::covariance_matrix;
    int k = 0;
    double nu4 = 0.0;
    double sigma2 = 0.0;
    std::vector<std::pair<std::string, double>> terms;  // ("V11", value), ...
};

EigvecVariance eigvec_variance(const PopulationModel& model, const Eigen::VectorXd& P, int n,
                               int k, MatrixKind kind, double nu4);

// 2 (R o R) + nu4 (G o G)(G^T o G^T)
Eigen::MatrixXd rfrak(const PopulationModel& model, double nu4);

// Sign analysis of the normalization effect on the leading eigenvalue
// statistic for a correlation-mode single-spike model.
//   effective_term: -(2 alpha_1 (V1oV1)'(V1oV1) - (V1oV1)'(RoR)(V1oV1)),
//                   the nu4 = 0 reduction, unscaled.
//   full_delta:     the full variance difference Var_corr - Var_cov of the
//                   normalized eigenvalue statistic, scaled by L0^2(alpha_1)
//                   and including the nu4 cross and Rfrak terms.
struct NormalizationEffect {
    double effective_term = 0.0;
    double full_delta = 0.0;
    double nu4 = 0.0;
};

NormalizationEffect normalization_effect(const PopulationModel& model, int n, double nu4 = 0.0);

}  // namespace spikelimits
