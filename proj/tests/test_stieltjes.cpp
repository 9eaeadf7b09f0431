#include <doctest.h>

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "spikelimits/errors.hpp"
#include "spikelimits/stieltjes.hpp"

using namespace spikelimits;
using cplx = std::complex<double>;

namespace {

// Roots of a cubic via the companion matrix; oracle for the two-atom case.
std::vector<cplx> cubic_roots(cplx c3, cplx c2, cplx c1, cplx c0) {
    Eigen::Matrix3cd companion = Eigen::Matrix3cd::Zero();
    companion(0, 2) = -c0 / c3;
    companion(1, 2) = -c1 / c3;
    companion(2, 2) = -c2 / c3;
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(companion);
    std::vector<cplx> roots;
    for (int i = 0; i < 3; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

cplx s_under_of(cplx s, cplx z, double y) { return -(1.0 - y) / z + y * s; }

}  // namespace

TEST_CASE("point mass, y=1, z=i: MP quadratic oracle") {
    // For H = delta_1 the self-consistency reduces to
    // y z s^2 + (z + y - 1) s + 1 = 0.
    const double y = 1.0;
    const cplx z{0.0, 1.0};
    const cplx a = y * z;
    const cplx b = z + y - 1.0;
    const cplx c = 1.0;
    const cplx disc = std::sqrt(b * b - 4.0 * a * c);
    cplx expected{0.0, 0.0};
    bool found = false;
    for (const cplx root : {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)}) {
        if (s_under_of(root, z, y).imag() > 0.0) {
            expected = root;
            found = true;
        }
    }
    REQUIRE(found);

    const StieltjesSolution sol = solve_stieltjes(z, BulkSpectrum::point_mass(), y);
    CHECK(std::abs(sol.s - expected) < 1e-9);
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.s_under.imag() > 0.0);
}

TEST_CASE("y -> 0 proxy recovers the population resolvent") {
    const cplx z{2.0, 1.0};
    const StieltjesSolution sol = solve_stieltjes(z, BulkSpectrum::point_mass(), 1e-8);
    CHECK(std::abs(sol.s - 1.0 / (1.0 - z)) < 1e-6);
}

TEST_CASE("two atoms: residual self-check and cubic-root oracle") {
    const BulkSpectrum h{{1.0, 3.0}, {0.5, 0.5}};
    const double y = 0.5;
    const cplx z{0.0, 10.0};
    const StieltjesSolution sol = solve_stieltjes(z, h, y);
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.s_under.imag() > 0.0);

    // s (t1 c - z)(t2 c - z) = w1 (t2 c - z) + w2 (t1 c - z), c = (1-y) - y z s
    const double t1 = h.atoms[0], t2 = h.atoms[1];
    const double w1 = h.weights[0], w2 = h.weights[1];
    const cplx a = 1.0 - y;
    const cplx b = -y * z;
    const cplx A1 = t1 * a - z, B1 = t1 * b;
    const cplx A2 = t2 * a - z, B2 = t2 * b;
    const auto roots = cubic_roots(B1 * B2, A1 * B2 + A2 * B1, A1 * A2 - w1 * B2 - w2 * B1,
                                   -(w1 * A2 + w2 * A1));
    double best = 1e300;
    for (const cplx r : roots)
        if (s_under_of(r, z, y).imag() > 0.0) best = std::min(best, std::abs(r - sol.s));
    CHECK(best < 1e-8);
}

TEST_CASE("rejects points off the upper half plane") {
    CHECK_THROWS_AS(solve_stieltjes(cplx{1.0, 0.0}, BulkSpectrum::point_mass(), 0.5),
                    DomainError);
    CHECK_THROWS_AS(solve_stieltjes(cplx{1.0, -1.0}, BulkSpectrum::point_mass(), 0.5),
                    DomainError);
}
