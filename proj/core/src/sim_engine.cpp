#include "spikelimits/sim_engine.hpp"

#include <cmath>

#include "spikelimits/errors.hpp"

namespace spikelimits {

Eigen::MatrixXd draw_source(int p, int n, const SourceDistribution& dist, std::uint64_t seed) {
    if (p < 1 || n < 1) throw DomainError("draw_source: p and n must be >= 1");
    Eigen::MatrixXd X(p, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < p; ++i)
            X(i, j) = dist.sample(seed, static_cast<std::uint64_t>(j) * p + i);
    return X;
}

Eigen::MatrixXd observe(const PopulationModel& model, const Eigen::MatrixXd& X) {
    if (X.rows() != model.p) throw DomainError("observe: X must have p rows");
    return model.G * X;
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& Y, int n) {
    if (n < 1) throw DomainError("sample_cov: n must be >= 1");
    // rank update fills one triangle; mirroring it keeps S symmetric
    // bit-for-bit
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(Y.rows(), Y.rows());
    S.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / n);
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) S(j, i) = S(i, j);
    return S;
}

Eigen::MatrixXd sample_corr(const Eigen::MatrixXd& S) {
    const Eigen::Index p = S.rows();
    Eigen::VectorXd d(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(S(i, i) > 0.0))
            throw DegenerateVariance("sample_corr: nonpositive diagonal entry at index " +
                                     std::to_string(i));
        d(i) = std::sqrt(S(i, i));
    }
    Eigen::MatrixXd R(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        R(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = S(i, j) / (d(i) * d(j));
            R(i, j) = v;
            R(j, i) = v;
        }
    }
    return R;
}

SpikedEigs extract_spiked(const Eigen::MatrixXd& A, const SpikeSet& spikes) {
    const int M = spikes.M();
    const Eigen::Index p = A.rows();
    if (M > p) throw DomainError("extract_spiked: M exceeds the matrix dimension");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("extract_spiked: eigensolver failed");

    SpikedEigs out;
    out.lambda.resize(M);
    out.Z.resize(p, M);
    // Eigen returns ascending order; take the top M, descending.
    for (int j = 0; j < M; ++j) {
        out.lambda(j) = es.eigenvalues()(p - 1 - j);
        out.Z.col(j) = es.eigenvectors().col(p - 1 - j);
        Eigen::Index arg = 0;
        out.Z.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.Z(arg, j) < 0.0) out.Z.col(j) = -out.Z.col(j);
    }
    return out;
}

double eig_stat(double lambda_j, double phi_k, int n) {
    if (!(phi_k > 0.0)) throw DomainError("eig_stat: phi must be positive");
    return std::sqrt(static_cast<double>(n)) * (lambda_j / phi_k - 1.0);
}

double vec_stat(const Eigen::MatrixXd& Z, int first, int last, const Eigen::VectorXd& P) {
    double s = 0.0;
    for (int j = first; j < last; ++j) {
        const double c = Z.col(j).dot(P);
        s += c * c;
    }
    return s;
}

}  // namespace spikelimits
