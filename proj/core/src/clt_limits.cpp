#include "spikelimits/clt_limits.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "spikelimits/errors.hpp"

namespace spikelimits {

namespace {

void require_unit_diagonal_for_correlation_kind(const PopulationModel& model, MatrixKind kind) {
    if (kind != MatrixKind::correlation_matrix) return;
    double worst = 0.0;
    for (int i = 0; i < model.p; ++i) worst = std::max(worst, std::abs(model.R(i, i) - 1.0));
    if (worst > 1e-8)
        throw DomainError(
            "correlation-matrix CLT requires a unit-diagonal population (max |R_ii - 1| = " +
            std::to_string(worst) + ")");
}

void require_cross_spike_separation(const PopulationModel& model, int i) {
    const double alpha_i = model.spike_alpha(i);
    for (int j = 0; j < model.K(); ++j) {
        if (j == i) continue;
        if (std::abs(alpha_i - model.spike_alpha(j)) < 1e-8 * alpha_i)
            throw SeparationError("spike groups " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1) +
                                  " are numerically coincident; cross-spike terms are unstable");
    }
}

}  // namespace

RmtPoint spike_point(const PopulationModel& model, int n, int k) {
    if (n < 1) throw DomainError("spike_point: n must be >= 1");
    if (k < 0 || k >= model.K()) throw DomainError("spike_point: spike index out of range");
    const double y_n = static_cast<double>(model.p) / n;
    return phi_suite(model.spike_alpha(k), bulk_esd(model), y_n);
}

double eigenvalue_limit(const PopulationModel& model, int n, int k) {
    return spike_point(model, n, k).phi;
}

Eigen::MatrixXd CltBlock::matricization() const {
    Eigen::MatrixXd out(m * m, m * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) out(a * m + b, c * m + d) = (*this)(a, b, c, d);
    return out;
}

Eigen::MatrixXd rfrak(const PopulationModel& model, double nu4) {
    const Eigen::MatrixXd GG = model.G.cwiseProduct(model.G);
    return 2.0 * model.R.cwiseProduct(model.R) + nu4 * (GG * GG.transpose());
}

CltBlock eigenvalue_clt_block(const PopulationModel& model, int n, int k, MatrixKind kind,
                              double nu4) {
    require_unit_diagonal_for_correlation_kind(model, kind);
    const RmtPoint pt = spike_point(model, n, k);
    const double l0sq = pt.l0 * pt.l0;
    const double alpha = pt.alpha;
    auto [first, last] = model.spike_range(k);
    const int m = last - first;

    CltBlock block;
    block.kind = kind;
    block.k = k;
    block.m = m;
    block.nu4 = nu4;
    block.cov.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);

    // Hadamard pairs of the spike columns of U and V (local index a*m+b).
    std::vector<Eigen::VectorXd> UU(static_cast<std::size_t>(m) * m);
    std::vector<Eigen::VectorXd> VV;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            UU[a * m + b] = model.U.col(first + a).cwiseProduct(model.U.col(first + b));

    Eigen::MatrixXd GG, Rf;
    const bool corr = kind == MatrixKind::correlation_matrix;
    if (corr) {
        VV.resize(static_cast<std::size_t>(m) * m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                VV[a * m + b] = model.V.col(first + a).cwiseProduct(model.V.col(first + b));
        GG = model.G.cwiseProduct(model.G);
        Rf = rfrak(model, nu4);
    }

    // Cov(G_ab, G_cd) is invariant under a<->b, c<->d and (ab)<->(cd); each
    // orbit is computed once at its canonical representative and mirrored so
    // the symmetry holds bit-for-bit.
    auto canonical = [m](int a, int b, int c, int d) {
        if (a > b) std::swap(a, b);
        if (c > d) std::swap(c, d);
        if (a * m + b > c * m + d) {
            std::swap(a, c);
            std::swap(b, d);
        }
        return std::array<int, 4>{a, b, c, d};
    };
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const auto [ca, cb, cc, cd] = canonical(a, b, c, d);
                    if (ca != a || cb != b || cc != c || cd != d) continue;
                    const double pair = (a == c && b == d ? 1.0 : 0.0) +
                                        (a == d && c == b ? 1.0 : 0.0);
                    double cov =
                        l0sq * pair / pt.phi1 + nu4 * l0sq * UU[a * m + b].dot(UU[c * m + d]);
                    if (corr) {
                        // symmetrized nu4 cross piece; see the Cov symmetry
                        // invariant
                        const double gg_cross =
                            0.5 * (VV[c * m + d].dot(GG * UU[a * m + b]) +
                                   VV[a * m + b].dot(GG * UU[c * m + d]));
                        cov -= 2.0 * l0sq *
                               (2.0 * alpha * VV[a * m + b].dot(VV[c * m + d]) + nu4 * gg_cross);
                        cov += l0sq * VV[a * m + b].dot(Rf * VV[c * m + d]);
                    }
                    block.cov[static_cast<std::size_t>(((a * m + b) * m + c)) * m + d] = cov;
                }
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const auto [ca, cb, cc, cd] = canonical(a, b, c, d);
                    block.cov[static_cast<std::size_t>(((a * m + b) * m + c)) * m + d] =
                        block.cov[static_cast<std::size_t>(((ca * m + cb) * m + cc)) * m + cd];
                }
    return block;
}

Eigen::MatrixXd simple_spike_joint_cov(const PopulationModel& model, int n, MatrixKind kind,
                                       double nu4) {
    for (const auto& s : model.spikes.spikes)
        if (s.mult != 1)
            throw MultiplicityError("simple_spike_joint_cov: all spikes must be simple");
    require_unit_diagonal_for_correlation_kind(model, kind);

    const int K = model.K();
    Eigen::MatrixXd C(K, K);
    std::vector<RmtPoint> pts;
    pts.reserve(K);
    for (int k = 0; k < K; ++k) pts.push_back(spike_point(model, n, k));

    const bool corr = kind == MatrixKind::correlation_matrix;
    Eigen::MatrixXd GG, Rf;
    if (corr) {
        GG = model.G.cwiseProduct(model.G);
        Rf = rfrak(model, nu4);
    }

    for (int i = 0; i < K; ++i) {
        auto [fi, li] = model.spike_range(i);
        const Eigen::VectorXd uu_i = model.U.col(fi).cwiseProduct(model.U.col(fi));
        const Eigen::VectorXd vv_i = model.V.col(fi).cwiseProduct(model.V.col(fi));
        for (int j = i; j < K; ++j) {
            if (i == j) {
                C(i, i) = eigenvalue_clt_block(model, n, i, kind, nu4)(0, 0, 0, 0);
                continue;
            }
            auto [fj, lj] = model.spike_range(j);
            const Eigen::VectorXd uu_j = model.U.col(fj).cwiseProduct(model.U.col(fj));
            const double l0l0 = pts[i].l0 * pts[j].l0;
            double c = nu4 * l0l0 * uu_i.dot(uu_j);
            if (corr) {
                const Eigen::VectorXd vv_j = model.V.col(fj).cwiseProduct(model.V.col(fj));
                const double ai = pts[i].alpha;
                const double aj = pts[j].alpha;
                // each resolvent-vs-diagonal pairing carries its own spike's
                // alpha and U/V orientation
                c -= l0l0 * (2.0 * (ai + aj) * vv_i.dot(vv_j) +
                             nu4 * (vv_j.dot(GG * uu_i) + vv_i.dot(GG * uu_j)));
                c += l0l0 * vv_i.dot(Rf * vv_j);
            }
            C(i, j) = c;
            C(j, i) = c;
        }
    }
    return C;
}

double eigvec_limit(const PopulationModel& model, const Eigen::VectorXd& P, int n, int k) {
    const ProjectionContext ctx = projection_context(model, P);
    return spike_point(model, n, k).l0 * ctx.tau_sq(model, k);
}

EigvecVariance eigvec_variance(const PopulationModel& model, const Eigen::VectorXd& P, int n,
                               int k, MatrixKind kind, double nu4) {
    require_unit_diagonal_for_correlation_kind(model, kind);
    require_cross_spike_separation(model, k);
    const ProjectionContext ctx = projection_context(model, P);
    const RmtPoint pt = spike_point(model, n, k);
    const int i = k;
    const int K = model.K();
    const bool corr = kind == MatrixKind::correlation_matrix;

    const double ai = pt.alpha;
    const double l0 = pt.l0;
    const double l0p = pt.l0p;
    const double l2 = pt.l2;
    const double phi1 = pt.phi1;
    const double psi = pt.psi;
    const double l0sq = l0 * l0;
    const double lmix = l0 + ai * l0p;  // (z phi'/psi)' at alpha_i
    const double sai = std::sqrt(ai);

    const Eigen::VectorXd& TRi = ctx.T_R[i];
    const Eigen::VectorXd& TGi = ctx.T_G[i];
    const Eigen::VectorXd& gbP = ctx.Gb_P;

    std::vector<double> alpha_j(K), sqrt_aj(K), dj(K);
    std::vector<Eigen::VectorXd> gho(K);  // G T_G[j]
    for (int j = 0; j < K; ++j) {
        alpha_j[j] = model.spike_alpha(j);
        sqrt_aj[j] = std::sqrt(alpha_j[j]);
        dj[j] = ai - alpha_j[j];
        gho[j] = model.G * ctx.T_G[j];
    }

    const Eigen::MatrixXd GG = model.G.cwiseProduct(model.G);
    // (I - Rb/alpha_i)^{-1} P by direct dense solve; alpha_i > ||Rb|| makes
    // the system SPD.
    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(model.p, model.p) - model.Rb / ai;
    const Eigen::VectorXd w = A.llt().solve(P);
    const Eigen::VectorXd rbw = model.Rb * w;
    const Eigen::VectorXd gbw = model.Gb.transpose() * w;

    auto had = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return a.cwiseProduct(b).eval();
    };

    const Eigen::VectorXd TRiP = had(TRi, ctx.P);
    const Eigen::VectorXd TRiTRi = had(TRi, TRi);
    const Eigen::VectorXd TGiTGi = had(TGi, TGi);
    const Eigen::VectorXd ghoii = had(gho[i], gho[i]);

    EigvecVariance out;
    out.kind = kind;
    out.k = k;
    out.nu4 = nu4;

    auto push = [&out](const std::string& label, double value) {
        out.terms.emplace_back(label, value);
    };

    // V_{1,*}: derivative-of-resolvent block. The cross terms against the
    // diagonal-entry pieces (indices 4..6) exist for the correlation kind only.
    {
        const double trtr = TRi.squaredNorm();
        push("V11", 2.0 * ai * ai * l2 * trtr * trtr +
                        nu4 * ai * ai * l0p * l0p * TGiTGi.squaredNorm());
        double v12 = 0.0, v16 = 0.0;
        for (int j = 0; j < K; ++j) {
            if (j == i) continue;
            v12 += 2.0 * nu4 * ai * sai * sqrt_aj[j] * l0 * l0p / dj[j] *
                   TGiTGi.dot(had(TGi, ctx.T_G[j]));
            v16 += -2.0 * ai * ai * l0 * l0p / dj[j] *
                   (2.0 * had(TRi, ctx.T_R[j]).dot(ghoii) +
                    nu4 * had(TRi, ctx.T_R[j]).dot(GG * TGiTGi));
        }
        push("V12", v12);
        push("V13", -2.0 * nu4 * sai * l0 * l0p * TGiTGi.dot(had(TGi, gbP)));
        if (corr) {
            push("V14",
                 ai * l0 * l0p * (2.0 * TRiP.dot(ghoii) + nu4 * TRiP.dot(GG * TGiTGi)));
            push("V15", -ai * lmix * l0p *
                            (2.0 * TRiTRi.dot(ghoii) + nu4 * TRiTRi.dot(GG * TGiTGi)));
            push("V16", v16);
        }
    }

    // V_{2,*}: cross-spike resolvent block.
    {
        double v22 = 0.0, v23 = 0.0, v24 = 0.0, v25 = 0.0, v26 = 0.0;
        for (int j1 = 0; j1 < K; ++j1) {
            if (j1 == i) continue;
            for (int j2 = 0; j2 < K; ++j2) {
                if (j2 == i) continue;
                v22 += 4.0 * l0sq * ai * sqrt_aj[j1] * sqrt_aj[j2] / (dj[j1] * dj[j2]) *
                       (TGi.squaredNorm() * ctx.T_G[j1].dot(ctx.T_G[j2]) / phi1 +
                        nu4 * had(TGi, ctx.T_G[j1]).dot(had(TGi, ctx.T_G[j2])));
                v26 += -4.0 * l0sq * ai * sai * sqrt_aj[j1] / (psi * dj[j1] * dj[j2]) *
                       (2.0 * had(TRi, ctx.T_R[j2]).dot(had(gho[i], gho[j1])) +
                        nu4 * had(TRi, ctx.T_R[j2]).dot(GG * had(TGi, ctx.T_G[j1])));
            }
            v23 += -4.0 * l0sq * sqrt_aj[j1] / dj[j1] * nu4 *
                   had(TGi, ctx.T_G[j1]).dot(had(TGi, gbP));
            v24 += 2.0 * l0sq * sai * sqrt_aj[j1] / dj[j1] *
                   (2.0 * TRiP.dot(had(gho[i], gho[j1])) +
                    nu4 * TRiP.dot(GG * had(TGi, ctx.T_G[j1])));
            v25 += -2.0 * l0 * sai * sqrt_aj[j1] * lmix / (psi * dj[j1]) *
                   (2.0 * TRiTRi.dot(had(gho[i], gho[j1])) +
                    nu4 * TRiTRi.dot(GG * had(TGi, ctx.T_G[j1])));
        }
        push("V22", v22);
        push("V23", v23);
        if (corr) {
            push("V24", v24);
            push("V25", v25);
            push("V26", v26);
        }
    }

    // V_{3,*}: bulk-resolvent block.
    {
        push("V33", 4.0 * l0sq / ai *
                        (TRi.squaredNorm() * w.dot(rbw) / phi1 +
                         nu4 * had(gbw, TGi).squaredNorm()));
        if (corr) {
            push("V34", -2.0 * l0sq / (psi * sai) *
                            (2.0 * TRiP.dot(had(rbw, gho[i])) +
                             nu4 * TRiP.dot(GG * had(TGi, gbw))));
            push("V35", 2.0 * l0 * lmix / (psi * sai) *
                            (2.0 * TRiTRi.dot(had(rbw, gho[i])) +
                             nu4 * TRiTRi.dot(GG * had(TGi, gbw))));
            double v36 = 0.0;
            for (int j = 0; j < K; ++j) {
                if (j == i) continue;
                v36 += 4.0 * l0sq * sai / (psi * dj[j]) *
                       (2.0 * had(TRi, ctx.T_R[j]).dot(had(rbw, gho[i])) +
                        nu4 * had(TRi, ctx.T_R[j]).dot(GG * had(TGi, gbw)));
            }
            push("V36", v36);
        }
    }

    // V_{4,*} .. V_{6,6}: the normalization (diagonal-entry) blocks, present
    // for the correlation kind only.
    if (corr) {
        const Eigen::MatrixXd Rf = rfrak(model, nu4);
        push("V44", l0sq * TRiP.dot(Rf * TRiP));
        push("V45", -l0 * lmix * TRiTRi.dot(Rf * TRiP));
        double v46 = 0.0, v56 = 0.0, v66 = 0.0;
        for (int j = 0; j < K; ++j) {
            if (j == i) continue;
            v46 += -2.0 * ai * l0sq / dj[j] * had(TRi, ctx.T_R[j]).dot(Rf * TRiP);
            v56 += 2.0 * ai * l0 * lmix / dj[j] * TRiTRi.dot(Rf * had(TRi, ctx.T_R[j]));
        }
        push("V46", v46);
        push("V55", lmix * lmix * TRiTRi.dot(Rf * TRiTRi));
        push("V56", v56);
        for (int j1 = 0; j1 < K; ++j1) {
            if (j1 == i) continue;
            for (int j2 = 0; j2 < K; ++j2) {
                if (j2 == i) continue;
                v66 += 4.0 * ai * ai * l0sq / (dj[j1] * dj[j2]) *
                       had(TRi, ctx.T_R[j2]).dot(Rf * had(TRi, ctx.T_R[j1]));
            }
        }
        push("V66", v66);
    }

    // sigma^2 = sum_j V_{j,j} + 2 sum_{j<l} V_{j,l}, accumulated over the
    // stored terms in order so the breakdown sum is reproducible bit-for-bit.
    double sigma2 = 0.0;
    for (const auto& [label, value] : out.terms) {
        const bool diagonal = label.size() == 3 && label[1] == label[2];
        sigma2 += (diagonal ? 1.0 : 2.0) * value;
    }
    out.sigma2 = sigma2;
    return out;
}

NormalizationEffect normalization_effect(const PopulationModel& model, int n, double nu4) {
    if (model.mode != ModelMode::correlation)
        throw ScopeError("normalization_effect: model must be built in correlation mode");
    if (model.K() != 1 || model.spikes.spikes[0].mult != 1)
        throw ScopeError("normalization_effect: exactly one simple leading spike required");

    const double alpha1 = model.spike_alpha(0);
    const Eigen::VectorXd vv = model.V.col(0).cwiseProduct(model.V.col(0));
    const Eigen::VectorXd uu = model.U.col(0).cwiseProduct(model.U.col(0));
    const Eigen::MatrixXd RR = model.R.cwiseProduct(model.R);

    NormalizationEffect eff;
    eff.nu4 = nu4;
    eff.effective_term = -(2.0 * alpha1 * vv.squaredNorm() - vv.dot(RR * vv));

    const RmtPoint pt = spike_point(model, n, 0);
    const double l0sq = pt.l0 * pt.l0;
    const Eigen::MatrixXd GG = model.G.cwiseProduct(model.G);
    eff.full_delta = l0sq * (-2.0 * (2.0 * alpha1 * vv.squaredNorm() + nu4 * vv.dot(GG * uu)) +
                             vv.dot(rfrak(model, nu4) * vv));
    return eff;
}

}  // namespace spikelimits
