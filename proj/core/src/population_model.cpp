#include "spikelimits/population_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "spikelimits/errors.hpp"
#include "spikelimits/rmt_point.hpp"
#include "spikelimits/rng.hpp"
#include "spikelimits/source_distribution.hpp"

namespace spikelimits {

namespace {

// Flip column signs so the first entry with |x| > 1e-12 is positive.
// paired: apply the same flip to the matching column of the second factor,
// keeping the product V S U^T unchanged.
void fix_column_signs(Eigen::MatrixXd& A, Eigen::MatrixXd* paired = nullptr) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        double lead = 0.0;
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            if (std::abs(A(r, c)) > 1e-12) {
                lead = A(r, c);
                break;
            }
        }
        if (lead < 0.0) {
            A.col(c) = -A.col(c);
            if (paired) paired->col(c) = -paired->col(c);
        }
    }
}

Eigen::MatrixXd seeded_orthogonal(int p, std::uint64_t seed) {
    SourceDistribution gauss{SourceKind::gaussian};
    Eigen::MatrixXd N(p, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i)
            N(i, j) = gauss.sample(seed, static_cast<std::uint64_t>(j) * p + i);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
    fix_column_signs(Q);
    return Q;
}

// Orthogonal completion of the equally weighted unit vector: the Householder
// reflection mapping e_1 to p^{-1/2} 1. Column 0 is exactly that vector.
Eigen::MatrixXd equal_weight_basis(int p) {
    Eigen::VectorXd u = Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    Eigen::VectorXd v = u - Eigen::VectorXd::Unit(p, 0);
    const double vtv = v.squaredNorm();
    Eigen::MatrixXd Q;
    if (vtv < 1e-30) {
        Q = Eigen::MatrixXd::Identity(p, p);
    } else {
        Q = Eigen::MatrixXd::Identity(p, p) - (2.0 / vtv) * (v * v.transpose());
    }
    Q.col(0) = u;
    fix_column_signs(Q);
    return Q;
}

Eigen::MatrixXd symmetrize(Eigen::MatrixXd S) {
    // mirror the lower triangle so S is symmetric bit-for-bit
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) S(j, i) = S(i, j);
    return S;
}

void finalize_derived(PopulationModel& m) {
    const int p = m.p;
    const int M = m.M();
    Eigen::VectorXd sqrt_lambda = m.lambda.cwiseMax(0.0).cwiseSqrt();
    m.G = m.V * sqrt_lambda.asDiagonal() * m.U.transpose();
    m.Gb = m.V.rightCols(p - M) * sqrt_lambda.tail(p - M).asDiagonal() *
           m.U.rightCols(p - M).transpose();
    // R = G G^T = V Lambda V^T; the eigendecomposition form keeps the
    // configured spectrum exact instead of squaring sqrt(lambda).
    m.R = symmetrize(m.V * m.lambda.asDiagonal() * m.V.transpose());
    m.Rb = symmetrize(m.V.rightCols(p - M) * m.lambda.tail(p - M).asDiagonal() *
                      m.V.rightCols(p - M).transpose());
}

void check_unit_diagonal(const Eigen::MatrixXd& R, double tol) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < R.rows(); ++i)
        worst = std::max(worst, std::abs(R(i, i) - 1.0));
    if (worst > tol) {
        std::ostringstream os;
        os << "correlation mode requires unit diagonal; max |R_ii - 1| = " << worst;
        throw NotACorrelationModel(os.str());
    }
}

}  // namespace

PopulationModel build_general(int p, const SpikeSet& spikes, std::span<const double> bulk_eigs,
                              std::uint64_t seed, ModelMode mode, ModelStructure structure) {
    if (p < 2) throw DomainError("build_general: p must be >= 2");
    spikes.validate();
    const int M = spikes.M();
    if (M >= p) throw DomainError("build_general: total spike multiplicity must be < p");
    if (static_cast<int>(bulk_eigs.size()) != p - M)
        throw DomainError("build_general: need exactly p - M bulk eigenvalues");
    for (double b : bulk_eigs)
        if (!(b >= 0.0) || !std::isfinite(b))
            throw DomainError("build_general: bulk eigenvalues must be finite and nonnegative");

    std::vector<double> bulk(bulk_eigs.begin(), bulk_eigs.end());
    std::sort(bulk.begin(), bulk.end(), std::greater<>());
    const double bulk_max = bulk.empty() ? 0.0 : bulk.front();
    if (!(spikes.spikes.back().alpha > bulk_max))
        throw DomainError("build_general: every spike must exceed the largest bulk eigenvalue");

    PopulationModel m;
    m.p = p;
    m.mode = mode;
    m.structure = structure;
    m.seed = seed;
    m.spikes = spikes;
    m.bulk = bulk;

    m.lambda.resize(p);
    int idx = 0;
    for (const auto& s : spikes.spikes)
        for (int c = 0; c < s.mult; ++c) m.lambda(idx++) = s.alpha;
    for (double b : bulk) m.lambda(idx++) = b;

    switch (structure) {
        case ModelStructure::identity_embedding:
            m.V = Eigen::MatrixXd::Identity(p, p);
            m.U = Eigen::MatrixXd::Identity(p, p);
            break;
        case ModelStructure::equal_weight_leading:
            m.V = equal_weight_basis(p);
            m.U = m.V;
            break;
        case ModelStructure::random_orthogonal:
            m.V = seeded_orthogonal(p, stream_u64(seed, 0));
            m.U = seeded_orthogonal(p, stream_u64(seed, 1));
            break;
    }

    if (mode == ModelMode::correlation && structure == ModelStructure::random_orthogonal) {
        // Paper defines G post-normalization: rescale rows to unit norm, then
        // re-extract exact factors from the rescaled G. Multiplicity groups
        // would split under the rescaling, so only simple spikes are allowed.
        for (const auto& s : spikes.spikes)
            if (s.mult != 1)
                throw DomainError(
                    "build_general: random_orthogonal correlation models require simple spikes");
        Eigen::MatrixXd G0 =
            m.V * m.lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal() * m.U.transpose();
        for (int i = 0; i < p; ++i) {
            const double norm = G0.row(i).norm();
            if (!(norm > 0.0))
                throw NotACorrelationModel("build_general: zero row in G, cannot normalize");
            G0.row(i) /= norm;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(G0, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::MatrixXd Vn = svd.matrixU();
        Eigen::MatrixXd Un = svd.matrixV();
        fix_column_signs(Vn, &Un);
        m.V = Vn;
        m.U = Un;
        m.lambda = svd.singularValues().array().square();
        for (int k = 0; k < m.K(); ++k) m.spikes.spikes[k].alpha = m.lambda(k);
        m.spikes.validate();
        m.bulk.assign(m.lambda.data() + M, m.lambda.data() + p);
        if (!(m.spikes.spikes.back().alpha > m.bulk.front()))
            throw SeparationError(
                "build_general: rescaled spikes no longer exceed the bulk spectrum");
    }

    finalize_derived(m);

    if (mode == ModelMode::correlation) check_unit_diagonal(m.R, 1e-8);
    return m;
}

PopulationModel build_equicorrelation(int p, double rho) {
    if (p < 2) throw DomainError("build_equicorrelation: p must be >= 2");
    if (!(rho > 0.0 && rho < 1.0))
        throw DomainError("build_equicorrelation: rho must lie in (0, 1)");
    SpikeSet spikes{{Spike{1.0 + (p - 1) * rho, 1}}};
    std::vector<double> bulk(static_cast<std::size_t>(p - 1), 1.0 - rho);
    return build_general(p, spikes, bulk, 0, ModelMode::correlation,
                         ModelStructure::equal_weight_leading);
}

ValidationReport validate(const PopulationModel& model, int n, double d) {
    if (n < 1) throw DomainError("validate: n must be >= 1");
    ValidationReport report;
    auto add = [&report](const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
    };

    const int p = model.p;
    const double ortho_v =
        (model.V.transpose() * model.V - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    add("orthonormality_V", ortho_v <= 1e-10, "max |V^T V - I| = " + std::to_string(ortho_v));
    const double ortho_u =
        (model.U.transpose() * model.U - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    add("orthonormality_U", ortho_u <= 1e-10, "max |U^T U - I| = " + std::to_string(ortho_u));

    if (model.mode == ModelMode::correlation) {
        double worst = 0.0;
        for (int i = 0; i < p; ++i) worst = std::max(worst, std::abs(model.R(i, i) - 1.0));
        add("unit_diagonal", worst <= 1e-10, "max |R_ii - 1| = " + std::to_string(worst));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.Rb, Eigen::EigenvaluesOnly);
    const double rb_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    const double bulk_max = model.bulk.empty() ? 0.0 : model.bulk.front();
    add("bulk_norm_bounded", rb_norm <= bulk_max * (1.0 + 1e-8) + 1e-10,
        "||R_b|| = " + std::to_string(rb_norm) + ", max bulk eig = " + std::to_string(bulk_max));

    const BulkSpectrum h = bulk_esd(model);
    const double y_n = static_cast<double>(p) / n;
    for (int k = 0; k < model.K(); ++k) {
        const std::string name = "phi_prime_positive_" + std::to_string(k + 1);
        try {
            const RmtPoint pt = phi_suite(model.spike_alpha(k), h, y_n);
            add(name, pt.phi1 > 0.0, "phi'(alpha) = " + std::to_string(pt.phi1));
        } catch (const Error& e) {
            add(name, false, e.what());
        }
    }

    const double gap = model.spikes.min_ratio_gap();
    add("ratio_gap", model.K() < 2 || gap > d,
        "min |alpha_k/alpha_j - 1| = " + std::to_string(gap) + ", d = " + std::to_string(d));
    return report;
}

BulkSpectrum bulk_esd(const PopulationModel& model) {
    return BulkSpectrum::from_eigenvalues(model.bulk);
}

nlohmann::json model_to_json(const PopulationModel& model) {
    nlohmann::json spikes = nlohmann::json::array();
    for (const auto& s : model.spikes.spikes)
        spikes.push_back({{"alpha", s.alpha}, {"mult", s.mult}});
    return nlohmann::json{{"schema", "model_v1"},
                          {"p", model.p},
                          {"mode", to_string(model.mode)},
                          {"spikes", spikes},
                          {"bulk", model.bulk},
                          {"structure", to_string(model.structure)},
                          {"seed", model.seed}};
}

PopulationModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != "model_v1")
            throw ParseError("model JSON: unsupported schema, expected model_v1");
        const int p = j.at("p").get<int>();
        SpikeSet spikes;
        for (const auto& s : j.at("spikes"))
            spikes.spikes.push_back({s.at("alpha").get<double>(), s.at("mult").get<int>()});
        const auto bulk = j.at("bulk").get<std::vector<double>>();
        const auto mode = parse_mode(j.at("mode").get<std::string>());
        const auto structure = parse_structure(j.at("structure").get<std::string>());
        const std::uint64_t seed = j.value("seed", std::uint64_t{0});
        return build_general(p, spikes, bulk, seed, mode, structure);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
}

}  // namespace spikelimits
