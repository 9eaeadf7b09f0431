#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spikelimits/population_model.hpp"
#include "spikelimits/source_distribution.hpp"
#include "spikelimits/spike_set.hpp"
#include "spikelimits/types.hpp"

namespace spikelimits {

// p x n matrix of i.i.d. standardized entries, deterministic for a fixed
// seed: entry (i,j) is sample #(j*p + i) of the counter stream.
Eigen::MatrixXd draw_source(int p, int n, const SourceDistribution& dist, std::uint64_t seed);

// Y = G X (the stored factor plays Gamma in covariance mode).
Eigen::MatrixXd observe(const PopulationModel& model, const Eigen::MatrixXd& X);

// S = (1/n) Y Y^T with symmetric accumulation.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& Y, int n);

// R_hat = diag^{-1/2}(S) S diag^{-1/2}(S); unit diagonal bit-exactly.
// Throws DegenerateVariance if any diagonal entry of S is <= 0.
Eigen::MatrixXd sample_corr(const Eigen::MatrixXd& S);

struct SpikedEigs {
    Eigen::VectorXd lambda;  // top M, descending
    Eigen::MatrixXd Z;       // p x M orthonormal eigenvectors
};

// Top-M eigenpairs of a symmetric matrix, descending, with each column's
// largest-magnitude entry made positive.
SpikedEigs extract_spiked(const Eigen::MatrixXd& A, const SpikeSet& spikes);

// theta = sqrt(n) (lambda_j / phi_k - 1)
double eig_stat(double lambda_j, double phi_k, int n);

// P_{s,k}^T P_{s,k} = sum_{j in I_k} (z_j^T P)^2 for columns [first, last).
double vec_stat(const Eigen::MatrixXd& Z, int first, int last, const Eigen::VectorXd& P);

// One Monte Carlo replication for one matrix kind.
struct ReplicationRecord {
    int rep_index = 0;
    MatrixKind kind = MatrixKind::covariance_matrix;
    std::uint64_t seed_used = 0;
    std::vector<double> lambda;  // M sample spiked eigenvalues, descending
    std::vector<double> theta;   // sqrt(n)(lambda_j/phi_k - 1), group-wise centering
    std::vector<std::vector<double>> proj;  // per projection: K per-spike stats
};

}  // namespace spikelimits
