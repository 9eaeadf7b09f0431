#include "spikelimits/bulk_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spikelimits/errors.hpp"

namespace spikelimits {

void BulkSpectrum::validate() const {
    if (atoms.empty() || atoms.size() != weights.size())
        throw DomainError("bulk spectrum: atoms/weights size mismatch or empty");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!std::isfinite(atoms[i]) || atoms[i] < 0.0)
            throw DomainError("bulk spectrum: atoms must be finite and nonnegative");
        if (i > 0 && atoms[i] < atoms[i - 1])
            throw DomainError("bulk spectrum: atoms must be nondecreasing");
        if (!(weights[i] > 0.0))
            throw DomainError("bulk spectrum: weights must be strictly positive");
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw DomainError("bulk spectrum: weights must sum to 1");
}

double BulkSpectrum::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) m += atoms[i] * weights[i];
    return m;
}

BulkSpectrum BulkSpectrum::point_mass(double t) {
    return BulkSpectrum{{t}, {1.0}};
}

BulkSpectrum BulkSpectrum::from_eigenvalues(std::span<const double> eigs) {
    if (eigs.empty()) throw DomainError("bulk spectrum: empty eigenvalue list");
    std::vector<double> sorted(eigs.begin(), eigs.end());
    std::sort(sorted.begin(), sorted.end());
    BulkSpectrum h;
    const double n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        h.atoms.push_back(sorted[i]);
        h.weights.push_back(static_cast<double>(j - i) / n);
        i = j;
    }
    h.validate();
    return h;
}

}  // namespace spikelimits
