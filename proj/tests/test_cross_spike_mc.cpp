#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikelimits/clt_limits.hpp"
#include "spikelimits/rng.hpp"
#include "spikelimits/sim_engine.hpp"

using namespace spikelimits;

// Monte Carlo agreement for the cross-spike machinery: two separated spikes,
// a projection direction mixing both spike spaces and the bulk, heavy-tailed
// sources. Slow errors in any of the coupled variance blocks show up here as
// a variance-ratio drift far outside the tolerance band.

namespace {

struct Moments {
    int count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }
    double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
};

}  // namespace

TEST_CASE("two-spike eigenvector variance agrees with simulation") {
    SpikeSet ss{{{12.0, 1}, {6.0, 1}}};
    std::vector<double> bulk(58, 0.8);
    const PopulationModel m = build_general(60, ss, bulk, 31, ModelMode::correlation,
                                            ModelStructure::random_orthogonal);
    const int n = 240;
    const int reps = 400;
    Eigen::VectorXd P =
        0.6 * m.V.col(0) + 0.5 * m.V.col(1) + 0.4 * m.V.col(5) + 0.3 * m.V.col(20);
    P.normalize();
    const SourceDistribution dist{SourceKind::laplace};  // nu4 = 3

    std::vector<double> centers(2), sigma2(2);
    for (int k = 0; k < 2; ++k) {
        centers[k] = eigvec_limit(m, P, n, k);
        sigma2[k] =
            eigvec_variance(m, P, n, k, MatrixKind::correlation_matrix, dist.nu4()).sigma2;
    }

    Moments acc[2];
    for (int r = 0; r < reps; ++r) {
        const Eigen::MatrixXd X = draw_source(60, n, dist, derive_rep_seed(6, r));
        const Eigen::MatrixXd Rhat = sample_corr(sample_cov(observe(m, X), n));
        const SpikedEigs se = extract_spiked(Rhat, m.spikes);
        for (int k = 0; k < 2; ++k) {
            auto [first, last] = m.spike_range(k);
            acc[k].add(std::sqrt(static_cast<double>(n)) *
                       (vec_stat(se.Z, first, last, P) - centers[k]));
        }
    }
    for (int k = 0; k < 2; ++k) {
        const double ratio = acc[k].variance() / sigma2[k];
        CAPTURE(k);
        CAPTURE(sigma2[k]);
        CAPTURE(acc[k].variance());
        CHECK(ratio > 0.7);
        CHECK(ratio < 1.4);
        CHECK(std::abs(acc[k].mean) <=
              4.0 * std::sqrt(sigma2[k] / reps) + 0.3);  // small-n bias allowance
    }
}

TEST_CASE("two-spike joint eigenvalue covariance agrees with simulation") {
    SpikeSet ss{{{12.0, 1}, {6.0, 1}}};
    std::vector<double> bulk(58, 0.8);
    const PopulationModel m = build_general(60, ss, bulk, 31, ModelMode::correlation,
                                            ModelStructure::random_orthogonal);
    const int n = 240;
    const int reps = 400;
    const SourceDistribution dist{SourceKind::laplace};
    const Eigen::MatrixXd C =
        simple_spike_joint_cov(m, n, MatrixKind::correlation_matrix, dist.nu4());
    const double phi1 = eigenvalue_limit(m, n, 0);
    const double phi2 = eigenvalue_limit(m, n, 1);

    double m1 = 0, m2 = 0, v1 = 0, v2 = 0, c12 = 0;
    int cnt = 0;
    for (int r = 0; r < reps; ++r) {
        const Eigen::MatrixXd X = draw_source(60, n, dist, derive_rep_seed(8, r));
        const Eigen::MatrixXd Rhat = sample_corr(sample_cov(observe(m, X), n));
        const SpikedEigs se = extract_spiked(Rhat, m.spikes);
        const double t1 = eig_stat(se.lambda(0), phi1, n);
        const double t2 = eig_stat(se.lambda(1), phi2, n);
        ++cnt;
        const double d1 = t1 - m1;
        m1 += d1 / cnt;
        const double d2 = t2 - m2;
        m2 += d2 / cnt;
        v1 += d1 * (t1 - m1);
        v2 += d2 * (t2 - m2);
        c12 += d1 * (t2 - m2);
    }
    v1 /= cnt - 1;
    v2 /= cnt - 1;
    c12 /= cnt - 1;
    CHECK(v1 / C(0, 0) > 0.7);
    CHECK(v1 / C(0, 0) < 1.4);
    CHECK(v2 / C(1, 1) > 0.7);
    CHECK(v2 / C(1, 1) < 1.4);
    // the off-diagonal carries its own MC noise of order sqrt(C11 C22 / reps)
    const double c12_sd = std::sqrt((C(0, 0) * C(1, 1) + C(0, 1) * C(0, 1)) / reps);
    CHECK(std::abs(c12 - C(0, 1)) <= 4.0 * c12_sd);
}
