// spike-limits: command-line front end for the spiked-model limit library.
// Subcommands: limits | variance | simulate | verify | normalize-effect.
// Exit codes: 0 success/all-pass, 1 input error, 2 domain error (phase
// transition/separation/scope), 3 insufficient data, 4 numerical failure,
// 5 verification checks failed.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikelimits/clt_limits.hpp"
#include "spikelimits/errors.hpp"
#include "spikelimits/harness.hpp"
#include "spikelimits/version.hpp"

using namespace spikelimits;
namespace fs = std::filesystem;

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
}

// Atomic write: temp file in the target directory, then rename over.
void write_file(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

int classify(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return 1;
    if (dynamic_cast<const InsufficientData*>(&e)) return 3;
    if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const NumericalError*>(&e) ||
        dynamic_cast<const DegenerateVariance*>(&e))
        return 4;
    if (dynamic_cast<const DomainError*>(&e)) return 2;
    return 1;
}

struct CommonArgs {
    std::string model_path;
    std::string config_path;
    std::string out_dir = ".";
    int n = 0;
    int spike = 1;
    std::string dist = "gaussian";
    std::string kind = "covariance";
    std::string projection;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> reps_override;
    std::optional<int> n_override;
};

ExperimentConfig load_config(const CommonArgs& args) {
    nlohmann::json j = load_json(args.config_path);
    if (args.seed_override) j["master_seed"] = *args.seed_override;
    if (args.reps_override) j["reps"] = *args.reps_override;
    if (args.n_override) j["n"] = *args.n_override;
    return ExperimentConfig::from_json(j);
}

nlohmann::json rmt_point_json(const RmtPoint& pt) {
    return nlohmann::json{{"alpha", pt.alpha}, {"y_n", pt.y},       {"phi", pt.phi},
                          {"phi1", pt.phi1},   {"phi2", pt.phi2},   {"phi3", pt.phi3},
                          {"psi", pt.psi},     {"s_under", pt.s_under}, {"l0", pt.l0},
                          {"l0p", pt.l0p},     {"l1", pt.l1},       {"l2", pt.l2}};
}

int cmd_limits(const CommonArgs& args) {
    const nlohmann::json model_doc = load_json(args.model_path);
    const PopulationModel model = model_from_json(model_doc);
    const int k = args.spike - 1;
    if (k < 0 || k >= model.K()) throw DomainError("spike index out of range");
    try {
        const RmtPoint pt = spike_point(model, args.n, k);
        nlohmann::json out = rmt_point_json(pt);
        out["version"] = kVersion;
        out["config_hash"] = fnv1a_hex(model_doc.dump());
        out["spike"] = args.spike;
        out["eigenvalue_limit"] = pt.phi;
        out["eigvec_limit_Vk"] = pt.l0;
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const BelowPhaseTransition& e) {
        std::cerr << "spike " << args.spike << ": " << e.what() << "\n";
        return 2;
    }
}

int cmd_variance(const CommonArgs& args) {
    const nlohmann::json model_doc = load_json(args.model_path);
    const PopulationModel model = model_from_json(model_doc);
    const int k = args.spike - 1;
    if (k < 0 || k >= model.K()) throw DomainError("spike index out of range");
    const MatrixKind kind = parse_kind(args.kind);
    const double nu4 = SourceDistribution::parse(args.dist).nu4();

    nlohmann::json out{{"version", kVersion},
                       {"config_hash", fnv1a_hex(model_doc.dump())},
                       {"spike_k", args.spike},
                       {"kind", to_string(kind)},
                       {"nu4", nu4}};
    if (!args.projection.empty()) {
        std::string name = args.projection;
        if (name == "Vk") name = "V" + std::to_string(args.spike);
        const NamedProjection proj = resolve_projection(model, nlohmann::json(name));
        const EigvecVariance ev = eigvec_variance(model, proj.vector, args.n, k, kind, nu4);
        out["projection"] = name;
        out["limit"] = eigvec_limit(model, proj.vector, args.n, k);
        out["sigma2"] = ev.sigma2;
        nlohmann::json terms;
        for (const auto& [label, value] : ev.terms) terms[label] = value;
        out["terms"] = terms;
    } else {
        const CltBlock block = eigenvalue_clt_block(model, args.n, k, kind, nu4);
        out["limit"] = eigenvalue_limit(model, args.n, k);
        double trace_var = 0.0;
        for (int a = 0; a < block.m; ++a)
            for (int b = 0; b < block.m; ++b) trace_var += block(a, a, b, b);
        out["sigma2"] = block.m == 1 ? block(0, 0, 0, 0) : trace_var;
        out["block"] = nlohmann::json{{"m", block.m}, {"cov", block.cov}};
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_and_write(const CommonArgs& args, bool verify) {
    const ExperimentConfig config = load_config(args);
    const auto t0 = std::chrono::steady_clock::now();
    const TheoryBundle theory = build_theory(config);
    const auto records = run(config);

    fs::create_directories(args.out_dir);
    write_file(fs::path(args.out_dir) / "records.csv", records_to_csv(records, config));
    if (!verify) {
        std::cerr << "wrote " << records.size() << " records\n";
        return 0;
    }

    const SummaryReport report = summarize(records, config, theory);
    write_file(fs::path(args.out_dir) / "report.json", report.to_json().dump(2) + "\n");
    write_file(fs::path(args.out_dir) / "plot_data.csv",
               plot_data_to_csv(records, config, theory));

    for (const auto& s : report.stats)
        std::cout << (s.pass ? "PASS " : "FAIL ") << to_string(s.target.kind) << " "
                  << s.target.name << "\n";
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    std::cerr << "verify: " << records.size() << " records in " << dt.count() << " s\n";
    if (!report.all_pass) {
        for (const auto& s : report.stats) {
            if (s.pass) continue;
            std::cerr << "failing: " << to_string(s.target.kind) << " " << s.target.name
                      << " (mean " << (s.mean_pass ? "ok" : "FAIL") << ", variance "
                      << (s.variance_pass ? "ok" : "FAIL") << ", ks "
                      << (s.ks_pass ? "ok" : "FAIL") << ")\n";
        }
        return 5;
    }
    return 0;
}

int cmd_normalize_effect(const CommonArgs& args) {
    const nlohmann::json model_doc = load_json(args.model_path);
    const PopulationModel model = model_from_json(model_doc);
    const double nu4 = SourceDistribution::parse(args.dist).nu4();
    const int n = args.n > 0 ? args.n : 2 * model.p;
    const NormalizationEffect eff = normalization_effect(model, n, nu4);
    nlohmann::json out{{"version", kVersion},
                       {"config_hash", fnv1a_hex(model_doc.dump())},
                       {"alpha1", model.spike_alpha(0)},
                       {"p", model.p},
                       {"n", n},
                       {"nu4", nu4},
                       {"effective_term", eff.effective_term},
                       {"full_delta", eff.full_delta},
                       {"sign", eff.effective_term < 0.0
                                    ? "negative"
                                    : (eff.effective_term > 0.0 ? "positive" : "zero")}};
    if (!args.config_path.empty()) {
        const ExperimentConfig config = load_config(args);
        const auto records = run(config);
        out["empirical"] = compare_normalization(config, records).to_json();
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized spiked-model limits, CLTs and Monte Carlo verification"};
    app.require_subcommand(1);
    CommonArgs args;

    auto* limits = app.add_subcommand("limits", "RMT point and first-order limits for a spike");
    limits->add_option("--model", args.model_path, "model JSON file")->required();
    limits->add_option("--n", args.n, "sample size")->required();
    limits->add_option("--spike", args.spike, "1-based spike index");
    limits->add_option("--dist", args.dist, "source distribution");

    auto* variance = app.add_subcommand("variance", "CLT variance breakdown");
    variance->add_option("--model", args.model_path, "model JSON file")->required();
    variance->add_option("--n", args.n, "sample size")->required();
    variance->add_option("--spike", args.spike, "1-based spike index");
    variance->add_option("--kind", args.kind, "covariance|correlation");
    variance->add_option("--projection", args.projection,
                         "Vk | V<j> | e<j> | orthogonal (omit for the eigenvalue block)");
    variance->add_option("--dist", args.dist, "source distribution");

    auto add_run_flags = [&args](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
        cmd->add_option("--out", args.out_dir, "output directory");
        cmd->add_option("--seed", args.seed_override, "override master_seed");
        cmd->add_option("--reps", args.reps_override, "override replication count");
        cmd->add_option("--n", args.n_override, "override sample size");
    };
    auto* simulate = app.add_subcommand("simulate", "run replications, write records CSV");
    add_run_flags(simulate);
    auto* verify = app.add_subcommand("verify", "run and check against theory");
    add_run_flags(verify);

    auto* norm = app.add_subcommand("normalize-effect", "S-versus-Rhat normalization analysis");
    norm->add_option("--model", args.model_path, "model JSON file")->required();
    norm->add_option("--config", args.config_path,
                     "optional experiment config for the paired run");
    norm->add_option("--n", args.n, "sample size for the plug-in scalars");
    norm->add_option("--dist", args.dist, "source distribution");

    CLI11_PARSE(app, argc, argv);

    try {
        if (limits->parsed()) return cmd_limits(args);
        if (variance->parsed()) return cmd_variance(args);
        if (simulate->parsed()) return run_and_write(args, false);
        if (verify->parsed()) return run_and_write(args, true);
        if (norm->parsed()) return cmd_normalize_effect(args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
