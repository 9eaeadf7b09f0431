#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "spikelimits/errors.hpp"
#include "spikelimits/rng.hpp"

namespace spikelimits {

enum class SourceKind { gaussian, rademacher, uniform, laplace };

// Standardized i.i.d. source family: mean 0, variance 1 for every kind.
// nu4 is the fourth cumulant E x^4 - 3 (0 for the Gaussian baseline).
struct SourceDistribution {
    SourceKind kind = SourceKind::gaussian;

    double nu4() const {
        switch (kind) {
            case SourceKind::gaussian: return 0.0;
            case SourceKind::rademacher: return -2.0;
            case SourceKind::uniform: return -1.2;
            case SourceKind::laplace: return 3.0;
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind) {
            case SourceKind::gaussian: return "gaussian";
            case SourceKind::rademacher: return "rademacher";
            case SourceKind::uniform: return "uniform";
            case SourceKind::laplace: return "laplace";
        }
        return "?";
    }

    static SourceDistribution parse(const std::string& s) {
        if (s == "gaussian") return {SourceKind::gaussian};
        if (s == "rademacher") return {SourceKind::rademacher};
        if (s == "uniform") return {SourceKind::uniform};
        if (s == "laplace") return {SourceKind::laplace};
        throw ParseError("unknown source distribution: " + s);
    }

    // Entry #k of the stream for `seed`. Each entry owns counters 2k, 2k+1
    // so all kinds share one layout and stay order-independent.
    double sample(std::uint64_t seed, std::uint64_t k) const {
        switch (kind) {
            case SourceKind::gaussian: {
                // Box-Muller; u1 in (0,1], u2 in (0,1).
                const double u1 =
                    (static_cast<double>(stream_u64(seed, 2 * k) >> 11) + 1.0) * 0x1.0p-53;
                const double u2 = stream_open01(seed, 2 * k + 1);
                return std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(2.0 * std::numbers::pi * u2);
            }
            case SourceKind::rademacher:
                return (stream_u64(seed, 2 * k) >> 63) ? 1.0 : -1.0;
            case SourceKind::uniform:
                // Uniform on [-sqrt(3), sqrt(3)]: variance 1.
                return std::sqrt(3.0) * (2.0 * stream_open01(seed, 2 * k) - 1.0);
            case SourceKind::laplace: {
                // Inverse CDF, scale 1/sqrt(2) so the variance is 1.
                const double u = stream_open01(seed, 2 * k);
                const double b = 1.0 / std::sqrt(2.0);
                const double v = u - 0.5;
                if (v == 0.0) return 0.0;
                return -b * (v > 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(v));
            }
        }
        return 0.0;
    }
};

}  // namespace spikelimits
