#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "spikelimits/errors.hpp"

namespace spikelimits {

struct Spike {
    double alpha = 0.0;
    int mult = 1;
};

// Default separation constant for the pairwise spike ratio gaps.
inline constexpr double kDefaultSeparation = 0.05;

// The spiked part of the population spectrum: K groups (alpha_k, m_k) with
// strictly decreasing alpha. Index set I_k holds the consecutive ranks of
// group k in the descending eigenvalue order.
struct SpikeSet {
    std::vector<Spike> spikes;

    int K() const { return static_cast<int>(spikes.size()); }

    int M() const {
        int m = 0;
        for (const auto& s : spikes) m += s.mult;
        return m;
    }

    // Half-open rank range [first, last) of group k within 0..M.
    std::pair<int, int> index_range(int k) const {
        int first = 0;
        for (int i = 0; i < k; ++i) first += spikes[i].mult;
        return {first, first + spikes[k].mult};
    }

    // Smallest pairwise |alpha_k/alpha_j - 1| over distinct groups;
    // +inf for a single group.
    double min_ratio_gap() const {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < spikes.size(); ++k)
            for (std::size_t j = 0; j < spikes.size(); ++j)
                if (j != k) gap = std::min(gap, std::abs(spikes[k].alpha / spikes[j].alpha - 1.0));
        return gap;
    }

    void validate(double d = kDefaultSeparation) const {
        if (spikes.empty()) throw DomainError("spike set: empty");
        for (std::size_t k = 0; k < spikes.size(); ++k) {
            if (!(spikes[k].alpha > 0.0) || !std::isfinite(spikes[k].alpha))
                throw DomainError("spike set: alpha must be finite and positive");
            if (spikes[k].mult < 1) throw DomainError("spike set: multiplicity must be >= 1");
            if (k > 0 && !(spikes[k].alpha < spikes[k - 1].alpha))
                throw DomainError("spike set: alpha values must be strictly decreasing");
        }
        if (spikes.size() > 1 && !(min_ratio_gap() > d))
            throw SeparationError("spike set: pairwise ratio gap " +
                                  std::to_string(min_ratio_gap()) +
                                  " does not exceed separation constant " + std::to_string(d));
    }
};

}  // namespace spikelimits
