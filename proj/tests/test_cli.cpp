#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = SPIKE_TEST_TMPDIR;

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args, const std::string& tag) {
    fs::create_directories(kTmp);
    const fs::path out = kTmp / (tag + ".out");
    const std::string cmd =
        std::string(SPIKE_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    r.stdout_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

fs::path write_json(const std::string& name, const nlohmann::json& j) {
    fs::create_directories(kTmp);
    const fs::path path = kTmp / name;
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

nlohmann::json delta_model(int p, double alpha) {
    return nlohmann::json{{"schema", "model_v1"},
                          {"p", p},
                          {"mode", "covariance"},
                          {"spikes", {{{"alpha", alpha}, {"mult", 1}}}},
                          {"bulk", std::vector<double>(p - 1, 1.0)},
                          {"structure", "identity_embedding"},
                          {"seed", 0}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("limits subcommand") {
    const fs::path model = write_json("delta4.json", delta_model(200, 4.0));
    const CliResult r = run_cli("limits --model " + model.string() + " --n 400", "limits_ok");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json out = nlohmann::json::parse(r.stdout_text);
    CHECK(out.at("phi").get<double>() == doctest::Approx(4.666667).epsilon(1e-6));
    CHECK(out.at("l0").get<double>() == doctest::Approx(0.809524).epsilon(1e-6));

    SUBCASE("below the phase transition exits 2") {
        const fs::path bad = write_json("delta15.json", delta_model(200, 1.5));
        CHECK(run_cli("limits --model " + bad.string() + " --n 400", "limits_pt").exit_code == 2);
    }
    SUBCASE("missing file exits 1") {
        CHECK(run_cli("limits --model /nonexistent.json --n 400", "limits_missing").exit_code ==
              1);
    }
    SUBCASE("malformed JSON exits 1") {
        const fs::path garbled = kTmp / "garbled.json";
        std::ofstream(garbled) << "{not json";
        CHECK(run_cli("limits --model " + garbled.string() + " --n 400", "limits_bad")
                  .exit_code == 1);
    }
}

TEST_CASE("variance subcommand") {
    const fs::path model = write_json("delta4v.json", delta_model(200, 4.0));
    SUBCASE("projection Vk, covariance kind") {
        const CliResult r = run_cli("variance --model " + model.string() +
                                        " --n 400 --projection Vk --kind covariance",
                                    "var_vk");
        REQUIRE(r.exit_code == 0);
        const nlohmann::json out = nlohmann::json::parse(r.stdout_text);
        CHECK(out.at("sigma2").get<double>() == doctest::Approx(0.254012).epsilon(1e-5));
        CHECK(out.at("terms").size() == 6);
    }
    SUBCASE("orthogonal projection has zero variance") {
        const CliResult r = run_cli("variance --model " + model.string() +
                                        " --n 400 --projection orthogonal --kind covariance",
                                    "var_orth");
        REQUIRE(r.exit_code == 0);
        const nlohmann::json out = nlohmann::json::parse(r.stdout_text);
        CHECK(std::abs(out.at("sigma2").get<double>()) <= 1e-12);
    }
    SUBCASE("correlation kind lists all 21 labeled terms") {
        nlohmann::json eq{{"schema", "model_v1"},
                          {"p", 100},
                          {"mode", "correlation"},
                          {"spikes", {{{"alpha", 50.5}, {"mult", 1}}}},
                          {"bulk", std::vector<double>(99, 0.5)},
                          {"structure", "equal_weight_leading"},
                          {"seed", 0}};
        const fs::path eq_path = write_json("equi.json", eq);
        const CliResult r = run_cli("variance --model " + eq_path.string() +
                                        " --n 200 --projection Vk --kind correlation",
                                    "var_corr");
        REQUIRE(r.exit_code == 0);
        const nlohmann::json out = nlohmann::json::parse(r.stdout_text);
        CHECK(out.at("terms").size() == 21);
        for (const std::string label : {"V11", "V26", "V36", "V44", "V66"})
            CHECK(out.at("terms").contains(label));
    }
}

TEST_CASE("verify subcommand") {
    nlohmann::json config{{"model", delta_model(50, 4.0)},
                          {"n", 500},
                          {"reps", 200},
                          {"dist", "gaussian"},
                          {"kinds", {"covariance_matrix"}},
                          {"projections", {"V1"}},
                          {"master_seed", 7}};
    const fs::path cfg = write_json("verify_cfg.json", config);
    const fs::path out1 = kTmp / "verify_out1";
    const fs::path out2 = kTmp / "verify_out2";

    const CliResult r =
        run_cli("verify --config " + cfg.string() + " --out " + out1.string(), "verify1");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("PASS") != std::string::npos);
    CHECK(fs::exists(out1 / "records.csv"));
    CHECK(fs::exists(out1 / "report.json"));
    CHECK(fs::exists(out1 / "plot_data.csv"));
    const nlohmann::json report = nlohmann::json::parse(slurp(out1 / "report.json"));
    CHECK(report.at("all_pass").get<bool>());
    CHECK(report.at("config_hash").get<std::string>().size() == 16);

    SUBCASE("byte-identical outputs on rerun") {
        const CliResult r2 =
            run_cli("verify --config " + cfg.string() + " --out " + out2.string(), "verify2");
        CHECK(r2.exit_code == 0);
        CHECK(slurp(out1 / "records.csv") == slurp(out2 / "records.csv"));
        CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
        CHECK(slurp(out1 / "plot_data.csv") == slurp(out2 / "plot_data.csv"));
    }
    SUBCASE("too few reps exits 3") {
        const CliResult r3 = run_cli("verify --config " + cfg.string() + " --out " +
                                         (kTmp / "verify_out3").string() + " --reps 10",
                                     "verify3");
        CHECK(r3.exit_code == 3);
    }
    SUBCASE("simulate writes records only") {
        const fs::path out4 = kTmp / "sim_out";
        const CliResult r4 =
            run_cli("simulate --config " + cfg.string() + " --out " + out4.string(), "sim");
        CHECK(r4.exit_code == 0);
        CHECK(fs::exists(out4 / "records.csv"));
        CHECK_FALSE(fs::exists(out4 / "report.json"));
    }
}

TEST_CASE("normalize-effect subcommand") {
    nlohmann::json eq{{"schema", "model_v1"},
                      {"p", 100},
                      {"mode", "correlation"},
                      {"spikes", {{{"alpha", 50.5}, {"mult", 1}}}},
                      {"bulk", std::vector<double>(99, 0.5)},
                      {"structure", "equal_weight_leading"},
                      {"seed", 0}};
    const fs::path model = write_json("equi_ne.json", eq);
    const CliResult r =
        run_cli("normalize-effect --model " + model.string() + " --n 200", "ne");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json out = nlohmann::json::parse(r.stdout_text);
    CHECK(out.at("effective_term").get<double>() == doctest::Approx(-0.7525).epsilon(1e-9));
    CHECK(out.at("sign") == "negative");

    SUBCASE("large p equal-weight effect is tiny") {
        const int p = 1600;
        const double b = (p - 5.0) / (p - 1.0);
        nlohmann::json big{{"schema", "model_v1"},
                           {"p", p},
                           {"mode", "correlation"},
                           {"spikes", {{{"alpha", 5.0}, {"mult", 1}}}},
                           {"bulk", std::vector<double>(p - 1, b)},
                           {"structure", "equal_weight_leading"},
                           {"seed", 0}};
        const fs::path big_path = write_json("big_ne.json", big);
        const CliResult rb =
            run_cli("normalize-effect --model " + big_path.string() + " --n 3200", "ne_big");
        REQUIRE(rb.exit_code == 0);
        const nlohmann::json out_b = nlohmann::json::parse(rb.stdout_text);
        CHECK(std::abs(out_b.at("effective_term").get<double>()) < 0.01);
    }
    SUBCASE("with a config the empirical comparison block appears") {
        nlohmann::json config{{"model", eq},
                              {"n", 200},
                              {"reps", 60},
                              {"dist", "gaussian"},
                              {"kinds", {"covariance_matrix", "correlation_matrix"}},
                              {"master_seed", 5}};
        const fs::path cfg = write_json("ne_cfg.json", config);
        const CliResult rc = run_cli("normalize-effect --model " + model.string() +
                                         " --config " + cfg.string() + " --n 200",
                                     "ne_cfg_run");
        REQUIRE(rc.exit_code == 0);
        const nlohmann::json out_c = nlohmann::json::parse(rc.stdout_text);
        CHECK(out_c.contains("empirical"));
        CHECK(out_c.at("empirical").contains("sign_verdict"));
    }
}
