#pragma once

#include <complex>

#include "spikelimits/bulk_spectrum.hpp"

namespace spikelimits {

// Stieltjes transform of the generalized MP law F^{y,H} at a point z, plus
// the companion transform S_under(z) = -(1-y)/z + y S(z).
struct StieltjesSolution {
    std::complex<double> z;
    std::complex<double> s;
    std::complex<double> s_under;
    double residual = 0.0;
    int iterations = 0;
};

struct StieltjesOptions {
    double damping = 0.5;
    int max_iterations = 10000;
    double step_tolerance = 1e-12;      // on successive iterates
    double residual_tolerance = 1e-10;  // on the self-consistency equation
};

// Damped fixed-point iteration on
//   S = int dH(t) / (t (1 - y - y z S) - z),
// on the branch with Im S_under > 0 for Im z > 0. Throws SolverError
// (carrying the residual) if the tolerance is not reached.
StieltjesSolution solve_stieltjes(std::complex<double> z, const BulkSpectrum& h, double y,
                                  const StieltjesOptions& opts = {});

}  // namespace spikelimits
