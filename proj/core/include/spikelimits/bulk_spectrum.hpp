#pragma once

#include <span>
#include <vector>

namespace spikelimits {

// Discrete bulk eigenvalue distribution H: atoms with probability weights.
// Stands in for H_R, H_{R,n} (correlation mode) and H_Sigma, H_{Sigma,n}
// (covariance mode). All integrals over H are exact weighted sums.
struct BulkSpectrum {
    std::vector<double> atoms;    // nonnegative, nondecreasing
    std::vector<double> weights;  // strictly positive, sum to 1

    // Throws DomainError if the invariants above do not hold.
    void validate() const;

    double max_atom() const { return atoms.empty() ? 0.0 : atoms.back(); }

    // Mean of H.
    double mean() const;

    // Point mass at t=1 (the classical MP bulk).
    static BulkSpectrum point_mass(double t = 1.0);

    // Group a list of eigenvalues into (atom, multiplicity/N) pairs.
    // Values are grouped by exact equality after sorting.
    static BulkSpectrum from_eigenvalues(std::span<const double> eigs);
};

}  // namespace spikelimits
