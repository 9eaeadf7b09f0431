#include "spikelimits/rmt_point.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spikelimits/errors.hpp"

namespace spikelimits {

RmtPoint phi_suite(double alpha, const BulkSpectrum& h, double y) {
    h.validate();
    if (!(y > 0.0)) throw DomainError("phi_suite: y must be positive");
    if (!(alpha > h.max_atom())) {
        std::ostringstream os;
        os << "phi_suite: alpha = " << alpha << " must lie strictly above the largest bulk atom "
           << h.max_atom();
        throw DomainError(os.str());
    }

    double i1 = 0.0;  // int t/(alpha-t) dH
    double i2 = 0.0;  // int t^2/(alpha-t)^2 dH
    double i3 = 0.0;  // int t^2/(alpha-t)^3 dH
    double i4 = 0.0;  // int t^2/(alpha-t)^4 dH
    double j2 = 0.0;  // int t/(alpha-t)^2 dH
    for (std::size_t i = 0; i < h.atoms.size(); ++i) {
        const double t = h.atoms[i];
        const double w = h.weights[i];
        const double g = alpha - t;
        i1 += w * t / g;
        i2 += w * t * t / (g * g);
        i3 += w * t * t / (g * g * g);
        i4 += w * t * t / (g * g * g * g);
        j2 += w * t / (g * g);
    }

    RmtPoint pt;
    pt.alpha = alpha;
    pt.y = y;
    pt.psi = 1.0 + y * i1;
    pt.phi = alpha * pt.psi;
    pt.phi1 = 1.0 - y * i2;
    pt.phi2 = 2.0 * y * i3;
    pt.phi3 = -6.0 * y * i4;
    pt.psi1 = -y * j2;
    pt.s_under = -1.0 / alpha;

    if (!(pt.phi1 > 0.0)) {
        std::ostringstream os;
        os << "phi'(alpha) = " << pt.phi1 << " <= 0 at alpha = " << alpha
           << ": spike at or below the phase transition";
        throw BelowPhaseTransition(os.str());
    }

    pt.l0 = alpha * pt.phi1 / pt.phi;
    pt.l0p = (pt.phi2 * pt.psi - pt.phi1 * pt.psi1) / (pt.psi * pt.psi);
    pt.l1 = alpha * pt.phi2 / (pt.phi * pt.phi1);
    pt.l2 = pt.l0p * pt.l0p / pt.phi1 - pt.l0p * pt.l1 +
            (3.0 * pt.phi2 * pt.phi2 - pt.phi1 * pt.phi3) / (6.0 * pt.psi * pt.psi * pt.phi1);
    return pt;
}

SeparationReport check_separation(const SpikeSet& spikes, const BulkSpectrum& h, double y,
                                  double d) {
    SeparationReport report;
    report.pass = true;
    for (int k = 0; k < spikes.K(); ++k) {
        SeparationEntry entry;
        entry.spike = k + 1;
        entry.alpha = spikes.spikes[k].alpha;
        try {
            const RmtPoint pt = phi_suite(entry.alpha, h, y);
            entry.phi_prime = pt.phi1;
            entry.phi_prime_positive = pt.phi1 > 0.0;
        } catch (const BelowPhaseTransition&) {
            entry.phi_prime_positive = false;
            entry.phi_prime = -std::numeric_limits<double>::infinity();
        } catch (const DomainError&) {
            entry.phi_prime_positive = false;
            entry.phi_prime = std::numeric_limits<double>::quiet_NaN();
        }
        double gap = std::numeric_limits<double>::infinity();
        for (int j = 0; j < spikes.K(); ++j)
            if (j != k)
                gap = std::min(gap, std::abs(entry.alpha / spikes.spikes[j].alpha - 1.0));
        entry.min_ratio_gap = gap;
        entry.ratio_gap_ok = spikes.K() < 2 || gap > d;
        report.pass = report.pass && entry.phi_prime_positive && entry.ratio_gap_ok;
        report.entries.push_back(entry);
    }
    return report;
}

}  // namespace spikelimits
