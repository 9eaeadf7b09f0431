#include <doctest.h>

#include <cstdlib>
#include <vector>

#include "spikelimits/clt_limits.hpp"
#include "spikelimits/errors.hpp"
#include "spikelimits/harness.hpp"
#include "spikelimits/rng.hpp"

using namespace spikelimits;

namespace {

nlohmann::json equicorrelation_config(int p, double rho, int n, int reps,
                                      bool both_kinds = true) {
    const double alpha = 1.0 + (p - 1) * rho;
    nlohmann::json model{{"schema", "model_v1"},
                         {"p", p},
                         {"mode", "correlation"},
                         {"spikes", {{{"alpha", alpha}, {"mult", 1}}}},
                         {"bulk", std::vector<double>(p - 1, 1.0 - rho)},
                         {"structure", "equal_weight_leading"},
                         {"seed", 0}};
    nlohmann::json kinds = both_kinds
                               ? nlohmann::json{"covariance_matrix", "correlation_matrix"}
                               : nlohmann::json{"covariance_matrix"};
    return nlohmann::json{{"model", model}, {"n", n},
                          {"reps", reps},   {"dist", "gaussian"},
                          {"kinds", kinds}, {"projections", {"V1"}},
                          {"master_seed", 424242}};
}

// Synthetic records whose theta_1 is exactly N(0, sigma2): the null model
// for calibrating the summarize() checks.
std::vector<ReplicationRecord> synthetic_theta_records(int reps, double sigma2,
                                                       std::uint64_t seed) {
    const SourceDistribution gauss{SourceKind::gaussian};
    std::vector<ReplicationRecord> records(reps);
    for (int r = 0; r < reps; ++r) {
        records[r].rep_index = r;
        records[r].kind = MatrixKind::covariance_matrix;
        records[r].lambda = {0.0};
        records[r].theta = {std::sqrt(sigma2) * gauss.sample(seed, r)};
    }
    return records;
}

ExperimentConfig tiny_config_for_summarize(int reps) {
    nlohmann::json model{{"schema", "model_v1"},
                         {"p", 10},
                         {"mode", "covariance"},
                         {"spikes", {{{"alpha", 4.0}, {"mult", 1}}}},
                         {"bulk", std::vector<double>(9, 1.0)},
                         {"structure", "identity_embedding"},
                         {"seed", 0}};
    return ExperimentConfig::from_json(nlohmann::json{{"model", model},
                                                      {"n", 20},
                                                      {"reps", reps},
                                                      {"dist", "gaussian"},
                                                      {"kinds", {"covariance_matrix"}},
                                                      {"master_seed", 1}});
}

TheoryBundle single_theta_theory(double sigma2) {
    TheoryBundle theory;
    theory.phi.push_back(1.0);
    StatTarget t;
    t.name = "theta_1";
    t.kind = MatrixKind::covariance_matrix;
    t.type = "theta";
    t.spike = 0;
    t.variance = sigma2;
    theory.targets.push_back(t);
    return theory;
}

}  // namespace

TEST_CASE("config parsing and guards") {
    const nlohmann::json j = equicorrelation_config(20, 0.5, 40, 10);
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    CHECK(c.n == 40);
    CHECK(c.kinds.size() == 2);
    CHECK(c.projections.size() == 1);
    CHECK(c.projections[0].name == "V1");
    CHECK(c.config_hash().size() == 16);

    nlohmann::json bad = j;
    bad["reps"] = 1;
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ParseError);
    bad = j;
    bad["n"] = 1;  // n < p/10
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ParseError);
    bad = j;
    bad["kinds"] = nlohmann::json::array();
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ParseError);
    bad = j;
    bad["projections"] = {"Q9"};
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ParseError);
}

TEST_CASE("run produces reps x kinds records, deterministically") {
    const ExperimentConfig c =
        ExperimentConfig::from_json(equicorrelation_config(20, 0.5, 40, 2));
    const auto records = run(c);
    CHECK(records.size() == 4);
    CHECK(records[0].rep_index == 0);
    CHECK(records[0].kind == MatrixKind::covariance_matrix);
    CHECK(records[1].kind == MatrixKind::correlation_matrix);
    CHECK(records[2].rep_index == 1);

    const auto again = run(c);
    CHECK(records_to_csv(records, c) == records_to_csv(again, c));
}

TEST_CASE("run aborts before simulating when the theory is undefined") {
    nlohmann::json j = equicorrelation_config(20, 0.5, 40, 10, false);
    // spike below the phase transition: alpha = 1.2 on a unit bulk
    j["model"]["spikes"][0]["alpha"] = 1.2;
    j["model"]["bulk"] = std::vector<double>(19, 1.0);
    j["model"]["mode"] = "covariance";
    j["model"]["structure"] = "identity_embedding";
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    CHECK_THROWS_AS(run(c), DomainError);
}

TEST_CASE("summarize null calibration at the exact theoretical variance") {
    const double sigma2 = 1.387756;
    const ExperimentConfig c = tiny_config_for_summarize(1000);
    const TheoryBundle theory = single_theta_theory(sigma2);

    SUBCASE("single seeded batch passes every check") {
        const auto records = synthetic_theta_records(1000, sigma2, 7);
        const SummaryReport rep = summarize(records, c, theory);
        REQUIRE(rep.stats.size() == 1);
        CHECK(rep.stats[0].mean_pass);
        CHECK(rep.stats[0].variance_checked);
        CHECK(rep.stats[0].variance_pass);
        CHECK(rep.stats[0].ks_checked);
        CHECK(rep.stats[0].ks_pass);
        CHECK(rep.all_pass);
    }
    SUBCASE("rates over 100 harness seeds") {
        int mean_ok = 0, var_ok = 0, ks_ok = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto records = synthetic_theta_records(1000, sigma2, 1000 + seed);
            const SummaryReport rep = summarize(records, c, theory);
            mean_ok += rep.stats[0].mean_pass;
            var_ok += rep.stats[0].variance_pass;
            ks_ok += rep.stats[0].ks_pass;
        }
        // |z|<=4 and the [0.8, 1.25] band are ~4 sigma checks; the KS gate is
        // a 5%-level test by design, so its null pass rate sits near 95%.
        CHECK(mean_ok >= 99);
        CHECK(var_ok >= 99);
        CHECK(ks_ok >= 88);
    }
}

TEST_CASE("summarize flags degenerate all-zero records") {
    const ExperimentConfig c = tiny_config_for_summarize(600);
    const TheoryBundle theory = single_theta_theory(1.0);
    std::vector<ReplicationRecord> records(600);
    for (int r = 0; r < 600; ++r) {
        records[r].rep_index = r;
        records[r].kind = MatrixKind::covariance_matrix;
        records[r].lambda = {0.0};
        records[r].theta = {0.0};
    }
    const SummaryReport rep = summarize(records, c, theory);
    CHECK_FALSE(rep.stats[0].variance_pass);
    CHECK_FALSE(rep.all_pass);
}

TEST_CASE("summarize demands 30 records per statistic") {
    const ExperimentConfig c = tiny_config_for_summarize(10);
    const TheoryBundle theory = single_theta_theory(1.0);
    const auto records = synthetic_theta_records(10, 1.0, 3);
    CHECK_THROWS_AS(summarize(records, c, theory), InsufficientData);
}

TEST_CASE("orthogonal projection statistic: degenerate gate") {
    nlohmann::json j = equicorrelation_config(40, 0.5, 80, 60, false);
    j["projections"] = {"orthogonal"};
    const ExperimentConfig c = ExperimentConfig::from_json(j);
    const TheoryBundle theory = build_theory(c);
    // the orthogonal direction has zero CLT variance
    bool found = false;
    for (const auto& t : theory.targets)
        if (t.type == "projection") {
            found = true;
            CHECK(t.variance <= 1e-12);
            CHECK(t.center <= 1e-12);
        }
    REQUIRE(found);
    const auto records = run(c);
    const SummaryReport rep = summarize(records, c, theory);
    for (const auto& s : rep.stats)
        if (s.target.type == "projection") {
            CHECK(s.degenerate);
            CHECK(s.mean_pass);
            CHECK(s.emp_mean < 0.05);  // P' z_k -> 0
        }
}

TEST_CASE("parallel and serial runs emit identical outputs") {
    const ExperimentConfig c =
        ExperimentConfig::from_json(equicorrelation_config(24, 0.5, 48, 40));
    setenv("SPIKE_LIMITS_THREADS", "1", 1);
    const auto serial = run(c);
    setenv("SPIKE_LIMITS_THREADS", "4", 1);
    const auto parallel = run(c);
    unsetenv("SPIKE_LIMITS_THREADS");
    CHECK(records_to_csv(serial, c) == records_to_csv(parallel, c));

    const TheoryBundle theory = build_theory(c);
    CHECK(summarize(serial, c, theory).to_json().dump() ==
          summarize(parallel, c, theory).to_json().dump());
    CHECK(plot_data_to_csv(serial, c, theory) == plot_data_to_csv(parallel, c, theory));
}

TEST_CASE("compare_normalization") {
    const ExperimentConfig c =
        ExperimentConfig::from_json(equicorrelation_config(40, 0.5, 80, 200));
    const auto records = run(c);
    const NormalizationComparison cmp = compare_normalization(c, records);
    CHECK(cmp.first_order_equal);
    CHECK(cmp.theory_var_corr - cmp.theory_var_cov ==
          doctest::Approx(cmp.full_delta).epsilon(1e-12));
    CHECK(cmp.effective_term < 0.0);  // alpha_1 = 20.5 > p/2 = 20
    CHECK(cmp.full_delta < 0.0);
    // a strong effect: 200 paired replications are plenty to see the sign
    CHECK(cmp.empirical_delta < 0.0);
    CHECK(cmp.sign_agreement);

    SUBCASE("covariance-mode model rejected") {
        nlohmann::json j = equicorrelation_config(20, 0.5, 40, 10);
        j["model"]["mode"] = "covariance";
        j["model"]["structure"] = "identity_embedding";
        j["model"]["spikes"][0]["alpha"] = 4.0;
        j["model"]["bulk"] = std::vector<double>(19, 1.0);
        const ExperimentConfig cov = ExperimentConfig::from_json(j);
        CHECK_THROWS_AS(compare_normalization(cov, {}), ScopeError);
    }
    SUBCASE("both kinds required") {
        const ExperimentConfig one =
            ExperimentConfig::from_json(equicorrelation_config(20, 0.5, 40, 10, false));
        CHECK_THROWS_AS(compare_normalization(one, {}), DomainError);
    }
}

TEST_CASE("records CSV schema") {
    const ExperimentConfig c =
        ExperimentConfig::from_json(equicorrelation_config(20, 0.5, 40, 2));
    const auto records = run(c);
    const std::string csv = records_to_csv(records, c);
    CHECK(csv.find("# spike-limits version=") == 0);
    CHECK(csv.find("rep,kind,lambda_1,theta_1,proj_1\n") != std::string::npos);
    CHECK(csv.find("covariance_matrix") != std::string::npos);
    CHECK(csv.find("correlation_matrix") != std::string::npos);
}

TEST_CASE("plot data carries histograms and the theoretical curve") {
    const ExperimentConfig c =
        ExperimentConfig::from_json(equicorrelation_config(20, 0.5, 40, 40, false));
    const auto records = run(c);
    const TheoryBundle theory = build_theory(c);
    const std::string csv = plot_data_to_csv(records, c, theory);
    CHECK(csv.find("statistic,kind,series,x0,x1,value") != std::string::npos);
    CHECK(csv.find("theta_1,covariance_matrix,hist,") != std::string::npos);
    CHECK(csv.find("theta_1,covariance_matrix,theory,") != std::string::npos);
}

TEST_CASE("multiplicity groups are summarized through the pair sum") {
    nlohmann::json model{{"schema", "model_v1"},
                         {"p", 40},
                         {"mode", "covariance"},
                         {"spikes", {{{"alpha", 5.0}, {"mult", 2}}}},
                         {"bulk", std::vector<double>(38, 1.0)},
                         {"structure", "identity_embedding"},
                         {"seed", 0}};
    const ExperimentConfig c = ExperimentConfig::from_json(
        nlohmann::json{{"model", model},
                       {"n", 400},
                       {"reps", 60},
                       {"dist", "gaussian"},
                       {"kinds", {"covariance_matrix"}},
                       {"master_seed", 31}});
    const TheoryBundle theory = build_theory(c);
    REQUIRE(theory.targets.size() == 1);
    CHECK(theory.targets[0].name == "theta_sum_1");
    CHECK(theory.targets[0].type == "theta_sum");
    // trace variance of the 2x2 block: sum over Cov(G_aa, G_bb)
    const CltBlock block =
        eigenvalue_clt_block(c.model, 400, 0, MatrixKind::covariance_matrix, 0.0);
    double trace_var = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) trace_var += block(a, a, b, b);
    CHECK(theory.targets[0].variance == doctest::Approx(trace_var).epsilon(1e-15));

    const auto records = run(c);
    const SummaryReport rep = summarize(records, c, theory);
    CHECK(rep.stats[0].count == 60);
    CHECK(std::isfinite(rep.stats[0].emp_variance));
}
