#include "spikelimits/stieltjes.hpp"

#include <cmath>
#include <sstream>

#include "spikelimits/errors.hpp"

namespace spikelimits {

namespace {

using cplx = std::complex<double>;

cplx mp_map(cplx s, cplx z, const BulkSpectrum& h, double y) {
    const cplx denom_core = 1.0 - y - y * z * s;
    cplx out{0.0, 0.0};
    for (std::size_t i = 0; i < h.atoms.size(); ++i)
        out += h.weights[i] / (h.atoms[i] * denom_core - z);
    return out;
}

}  // namespace

StieltjesSolution solve_stieltjes(cplx z, const BulkSpectrum& h, double y,
                                  const StieltjesOptions& opts) {
    if (!(z.imag() > 0.0)) throw DomainError("solve_stieltjes: Im z must be positive");
    if (!(y > 0.0)) throw DomainError("solve_stieltjes: y must be positive");
    h.validate();

    // Start from the trivial large-|z| behaviour S ~ -1/z, which already has
    // Im S_under > 0 for Im z > 0.
    cplx s = -1.0 / z;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const cplx next = (1.0 - opts.damping) * s + opts.damping * mp_map(s, z, h, y);
        const double step = std::abs(next - s);
        s = next;
        if (step <= opts.step_tolerance) break;
    }

    StieltjesSolution sol;
    sol.z = z;
    sol.s = s;
    sol.s_under = -(1.0 - y) / z + y * s;
    sol.residual = std::abs(s - mp_map(s, z, h, y));
    sol.iterations = it;

    if (sol.residual > opts.residual_tolerance || !(sol.s_under.imag() > 0.0)) {
        std::ostringstream os;
        os << "solve_stieltjes: no convergence to the Im S_under > 0 branch at z = (" << z.real()
           << ", " << z.imag() << "), residual = " << sol.residual;
        throw SolverError(os.str(), sol.residual);
    }
    return sol;
}

}  // namespace spikelimits
