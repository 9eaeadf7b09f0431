#include "spikelimits/projection.hpp"

#include <cmath>

#include "spikelimits/errors.hpp"

namespace spikelimits {

ProjectionContext projection_context(const PopulationModel& model, const Eigen::VectorXd& P) {
    if (P.size() != model.p) throw DomainError("projection_context: dimension mismatch");
    if (std::abs(P.norm() - 1.0) > 1e-12)
        throw DomainError("projection_context: P must be a unit vector");

    ProjectionContext ctx;
    ctx.P = P;
    ctx.tau = model.V.transpose() * P;
    ctx.Gb_P = model.Gb.transpose() * P;
    ctx.T_G.reserve(model.K());
    ctx.T_R.reserve(model.K());
    for (int k = 0; k < model.K(); ++k) {
        auto [first, last] = model.spike_range(k);
        const int m = last - first;
        const auto Vk = model.V.middleCols(first, m);
        const auto Uk = model.U.middleCols(first, m);
        const Eigen::VectorXd coeff = Vk.transpose() * P;  // tau restricted to I_k
        ctx.T_G.push_back(Uk * coeff);
        ctx.T_R.push_back(Vk * coeff);
    }
    return ctx;
}

}  // namespace spikelimits
