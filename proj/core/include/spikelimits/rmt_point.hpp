#pragma once

#include <string>
#include <vector>

#include "spikelimits/bulk_spectrum.hpp"
#include "spikelimits/spike_set.hpp"

namespace spikelimits {

// All scalar RMT quantities evaluated at one spike location alpha, for a
// discrete bulk spectrum H and aspect ratio y. phi is the spike-forward map:
// a population spike alpha maps to the sample eigenvalue limit phi(alpha).
struct RmtPoint {
    double alpha = 0.0;
    double y = 0.0;
    double phi = 0.0;      // alpha (1 + y int t/(alpha-t) dH)
    double phi1 = 0.0;     // 1 - y int t^2/(alpha-t)^2 dH
    double phi2 = 0.0;     // 2y int t^2/(alpha-t)^3 dH
    double phi3 = 0.0;     // -6y int t^2/(alpha-t)^4 dH
    double psi = 0.0;      // phi / alpha
    double psi1 = 0.0;     // -y int t/(alpha-t)^2 dH
    double s_under = 0.0;  // S_under(phi(alpha)) = -1/alpha
    double l0 = 0.0;       // alpha phi'/phi
    double l0p = 0.0;      // (phi''psi - phi'psi')/psi^2
    double l1 = 0.0;       // alpha phi''/(phi phi')
    double l2 = 0.0;       // l0p^2/phi' - l0p l1 + (3 phi''^2 - phi' phi''')/(6 psi^2 phi')
};

// Evaluate the phi suite at a spike strictly above every atom of H.
// Throws DomainError if alpha <= max atom, BelowPhaseTransition if
// phi'(alpha) <= 0.
RmtPoint phi_suite(double alpha, const BulkSpectrum& h, double y);

struct SeparationEntry {
    int spike = 0;  // 1-based group index
    double alpha = 0.0;
    bool phi_prime_positive = false;
    double phi_prime = 0.0;
    bool ratio_gap_ok = false;
    double min_ratio_gap = 0.0;
};

struct SeparationReport {
    std::vector<SeparationEntry> entries;
    bool pass = false;
};

// Per-spike separation report: phi'(alpha_k) > 0 and pairwise ratio gaps > d.
SeparationReport check_separation(const SpikeSet& spikes, const BulkSpectrum& h, double y,
                                  double d = kDefaultSeparation);

}  // namespace spikelimits
