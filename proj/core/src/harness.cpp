#include "spikelimits/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "spikelimits/clt_limits.hpp"
#include "spikelimits/errors.hpp"
#include "spikelimits/rng.hpp"
#include "spikelimits/version.hpp"

namespace spikelimits {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double normal_cdf(double x, double sigma) {
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

int thread_cap() {
    if (const char* env = std::getenv("SPIKE_LIMITS_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return std::min(t, 256);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 256u));
}

struct Welford {
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

double stat_value(const ReplicationRecord& rec, const ExperimentConfig& config,
                  const StatTarget& t) {
    if (t.type == "theta") {
        auto [first, last] = config.model.spike_range(t.spike);
        (void)last;
        return rec.theta[first];
    }
    if (t.type == "theta_sum") {
        auto [first, last] = config.model.spike_range(t.spike);
        double s = 0.0;
        for (int j = first; j < last; ++j) s += rec.theta[j];
        return s;
    }
    return rec.proj[t.projection][t.spike];
}

}  // namespace

NamedProjection resolve_projection(const PopulationModel& model, const nlohmann::json& entry) {
    if (entry.is_string()) {
        const std::string s = entry.get<std::string>();
        if (s == "orthogonal") {
            // first bulk column: orthogonal to every spike direction
            return {s, model.V.col(model.M())};
        }
        if (s.size() >= 2 && (s[0] == 'V' || s[0] == 'e')) {
            const int idx = std::atoi(s.c_str() + 1);
            if (s[0] == 'V') {
                if (idx < 1 || idx > model.K())
                    throw ParseError("projection " + s + ": spike index out of range");
                auto [first, last] = model.spike_range(idx - 1);
                (void)last;
                return {s, model.V.col(first)};
            }
            if (idx < 1 || idx > model.p)
                throw ParseError("projection " + s + ": coordinate out of range");
            return {s, Eigen::VectorXd::Unit(model.p, idx - 1)};
        }
        throw ParseError("unknown projection name: " + s);
    }
    if (entry.is_object()) {
        const std::string name = entry.at("name").get<std::string>();
        const auto values = entry.at("vector").get<std::vector<double>>();
        if (static_cast<int>(values.size()) != model.p)
            throw ParseError("projection " + name + ": vector length must equal p");
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
        const double norm = v.norm();
        if (std::abs(norm - 1.0) > 1e-8)
            throw ParseError("projection " + name + ": vector must be unit norm");
        return {name, v / norm};
    }
    throw ParseError("projection entries must be names or {name, vector} objects");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig c;
        c.raw = j;
        c.model = model_from_json(j.at("model"));
        c.n = j.at("n").get<int>();
        c.reps = j.at("reps").get<int>();
        if (c.reps < 2) throw ParseError("config: reps must be >= 2");
        if (c.n < 1 || 10 * c.n < c.model.p)
            throw ParseError("config: need n >= p/10 (extreme aspect ratios unsupported)");
        c.dist = SourceDistribution::parse(j.value("dist", std::string("gaussian")));
        if (!j.contains("kinds") || !j.at("kinds").is_array() || j.at("kinds").empty())
            throw ParseError("config: kinds must be a nonempty array");
        for (const auto& k : j.at("kinds")) c.kinds.push_back(parse_kind(k.get<std::string>()));
        if (j.contains("projections"))
            for (const auto& pspec : j.at("projections"))
                c.projections.push_back(resolve_projection(c.model, pspec));
        c.master_seed = j.value("master_seed", std::uint64_t{0});
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
}

std::string ExperimentConfig::config_hash() const { return fnv1a_hex(raw.dump()); }

TheoryBundle build_theory(const ExperimentConfig& config) {
    const PopulationModel& model = config.model;
    const double nu4 = config.dist.nu4();
    TheoryBundle theory;
    theory.phi.reserve(model.K());
    for (int k = 0; k < model.K(); ++k)
        theory.phi.push_back(eigenvalue_limit(model, config.n, k));

    const double sqrt_n = std::sqrt(static_cast<double>(config.n));
    for (MatrixKind kind : config.kinds) {
        for (int k = 0; k < model.K(); ++k) {
            const CltBlock block = eigenvalue_clt_block(model, config.n, k, kind, nu4);
            StatTarget t;
            t.kind = kind;
            t.spike = k;
            if (block.m == 1) {
                t.name = "theta_" + std::to_string(k + 1);
                t.type = "theta";
                t.variance = block(0, 0, 0, 0);
            } else {
                t.name = "theta_sum_" + std::to_string(k + 1);
                t.type = "theta_sum";
                double v = 0.0;
                for (int a = 0; a < block.m; ++a)
                    for (int b = 0; b < block.m; ++b) v += block(a, a, b, b);
                t.variance = v;
            }
            theory.targets.push_back(std::move(t));
        }
        for (std::size_t pi = 0; pi < config.projections.size(); ++pi) {
            for (int k = 0; k < model.K(); ++k) {
                StatTarget t;
                t.kind = kind;
                t.spike = k;
                t.projection = static_cast<int>(pi);
                t.name = "proj_" + config.projections[pi].name + "_" + std::to_string(k + 1);
                t.type = "projection";
                t.center = eigvec_limit(model, config.projections[pi].vector, config.n, k);
                t.scale = sqrt_n;
                t.variance =
                    eigvec_variance(model, config.projections[pi].vector, config.n, k, kind, nu4)
                        .sigma2;
                theory.targets.push_back(std::move(t));
            }
        }
    }
    return theory;
}

std::vector<ReplicationRecord> run(const ExperimentConfig& config) {
    const PopulationModel& model = config.model;
    const ValidationReport report = validate(model, config.n);
    if (!report.all_pass())
        throw DomainError("run: model validation failed: " + report.failures());
    const TheoryBundle theory = build_theory(config);

    const int nk = static_cast<int>(config.kinds.size());
    std::vector<ReplicationRecord> records(static_cast<std::size_t>(config.reps) * nk);

    auto simulate_rep = [&](int r) {
        const std::uint64_t seed_r = derive_rep_seed(config.master_seed, r);
        const Eigen::MatrixXd X = draw_source(model.p, config.n, config.dist, seed_r);
        const Eigen::MatrixXd Y = observe(model, X);
        const Eigen::MatrixXd S = sample_cov(Y, config.n);
        for (int ki = 0; ki < nk; ++ki) {
            const MatrixKind kind = config.kinds[ki];
            const Eigen::MatrixXd A =
                kind == MatrixKind::covariance_matrix ? S : sample_corr(S);
            const SpikedEigs se = extract_spiked(A, model.spikes);
            ReplicationRecord rec;
            rec.rep_index = r;
            rec.kind = kind;
            rec.seed_used = seed_r;
            rec.lambda.assign(se.lambda.data(), se.lambda.data() + se.lambda.size());
            rec.theta.resize(model.M());
            for (int k = 0; k < model.K(); ++k) {
                auto [first, last] = model.spike_range(k);
                for (int j = first; j < last; ++j)
                    rec.theta[j] = eig_stat(rec.lambda[j], theory.phi[k], config.n);
            }
            rec.proj.reserve(config.projections.size());
            for (const auto& proj : config.projections) {
                std::vector<double> per_spike(model.K());
                for (int k = 0; k < model.K(); ++k) {
                    auto [first, last] = model.spike_range(k);
                    per_spike[k] = vec_stat(se.Z, first, last, proj.vector);
                }
                rec.proj.push_back(std::move(per_spike));
            }
            records[static_cast<std::size_t>(r) * nk + ki] = std::move(rec);
        }
    };

    const int threads = std::min(thread_cap(), config.reps);
    if (threads <= 1) {
        for (int r = 0; r < config.reps; ++r) simulate_rep(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < config.reps; r = next.fetch_add(1))
                    simulate_rep(r);
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

SummaryReport summarize(const std::vector<ReplicationRecord>& records,
                        const ExperimentConfig& config, const TheoryBundle& theory) {
    SummaryReport report;
    report.n = config.n;
    report.reps = config.reps;
    report.master_seed = config.master_seed;
    report.config_hash = config.config_hash();
    report.all_pass = true;

    for (const StatTarget& target : theory.targets) {
        std::vector<double> normalized;
        Welford acc;
        for (const auto& rec : records) {
            if (rec.kind != target.kind) continue;
            const double x = stat_value(rec, config, target);
            acc.add(x);
            normalized.push_back(target.scale * (x - target.center));
        }
        if (acc.count < 30)
            throw InsufficientData("summarize: statistic " + target.name + " has " +
                                   std::to_string(acc.count) +
                                   " records; need >= 30 for distributional checks");

        StatSummary s;
        s.target = target;
        s.count = acc.count;
        s.emp_mean = acc.mean;
        s.emp_variance = target.scale * target.scale * acc.variance();
        s.ks_critical = 1.358 / std::sqrt(static_cast<double>(acc.count));
        s.degenerate = target.variance < 1e-10;

        if (s.degenerate) {
            // Nonnegative statistics piling up at 0 have mean ~ sd; gate on
            // the population spread rather than a stderr that shrinks with
            // reps.
            const double sd = std::sqrt(acc.variance());
            s.mean_pass = std::abs(acc.mean - target.center) <= 4.0 * std::max(sd, 1e-12);
        } else {
            const double sigma = std::sqrt(target.variance);
            s.z_mean = target.scale * (acc.mean - target.center) *
                       std::sqrt(static_cast<double>(acc.count)) / sigma;
            s.mean_pass = std::abs(s.z_mean) <= 4.0;
            s.variance_ratio = s.emp_variance / target.variance;
            if (acc.count >= 500) {
                s.variance_checked = true;
                s.variance_pass = s.variance_ratio >= 0.8 && s.variance_ratio <= 1.25;
            }
            std::sort(normalized.begin(), normalized.end());
            const double N = static_cast<double>(normalized.size());
            double d = 0.0;
            for (std::size_t i = 0; i < normalized.size(); ++i) {
                const double f = normal_cdf(normalized[i], sigma);
                d = std::max(d, std::max(f - i / N, (i + 1) / N - f));
            }
            s.ks = d;
            s.ks_checked = true;
            s.ks_pass = d <= s.ks_critical;
        }
        s.pass = s.mean_pass && s.variance_pass && s.ks_pass;
        report.all_pass = report.all_pass && s.pass;
        report.stats.push_back(std::move(s));
    }
    return report;
}

nlohmann::json SummaryReport::to_json() const {
    nlohmann::json stats_json = nlohmann::json::array();
    for (const auto& s : stats) {
        nlohmann::json entry{
            {"name", s.target.name},
            {"kind", to_string(s.target.kind)},
            {"type", s.target.type},
            {"spike", s.target.spike + 1},
            {"count", s.count},
            {"theory", {{"mean", s.target.center}, {"variance", s.target.variance}}},
            {"empirical", {{"mean", s.emp_mean}, {"variance", s.emp_variance}}},
            {"degenerate", s.degenerate},
            {"checks",
             {{"mean", s.mean_pass},
              {"variance", s.variance_checked ? nlohmann::json(s.variance_pass) : "skipped"},
              {"ks", s.ks_checked ? nlohmann::json(s.ks_pass) : "skipped"}}},
            {"pass", s.pass}};
        if (!s.degenerate) {
            entry["z_mean"] = s.z_mean;
            entry["variance_ratio"] = s.variance_ratio;
            entry["ks"] = s.ks;
            entry["ks_critical"] = s.ks_critical;
        }
        stats_json.push_back(std::move(entry));
    }
    return nlohmann::json{{"version", kVersion},    {"config_hash", config_hash},
                          {"n", n},                 {"reps", reps},
                          {"master_seed", master_seed}, {"statistics", stats_json},
                          {"all_pass", all_pass}};
}

NormalizationComparison compare_normalization(const ExperimentConfig& config,
                                              const std::vector<ReplicationRecord>& records) {
    const PopulationModel& model = config.model;
    if (model.mode != ModelMode::correlation)
        throw ScopeError("compare_normalization: correlation-mode model required");
    if (model.K() != 1 || model.spikes.spikes[0].mult != 1)
        throw ScopeError("compare_normalization: a single simple spike is required");
    const bool has_cov = std::find(config.kinds.begin(), config.kinds.end(),
                                   MatrixKind::covariance_matrix) != config.kinds.end();
    const bool has_corr = std::find(config.kinds.begin(), config.kinds.end(),
                                    MatrixKind::correlation_matrix) != config.kinds.end();
    if (!has_cov || !has_corr)
        throw DomainError("compare_normalization: both matrix kinds must be enabled");

    const double nu4 = config.dist.nu4();
    NormalizationComparison cmp;
    cmp.phi_cov = eigenvalue_limit(model, config.n, 0);
    cmp.phi_corr = eigenvalue_limit(model, config.n, 0);
    cmp.first_order_equal = cmp.phi_cov == cmp.phi_corr;

    Welford cov_acc, corr_acc;
    for (const auto& rec : records) {
        if (rec.kind == MatrixKind::covariance_matrix) cov_acc.add(rec.theta[0]);
        else corr_acc.add(rec.theta[0]);
    }
    cmp.var_theta_cov = cov_acc.variance();
    cmp.var_theta_corr = corr_acc.variance();
    cmp.empirical_delta = cmp.var_theta_corr - cmp.var_theta_cov;

    cmp.theory_var_cov =
        eigenvalue_clt_block(model, config.n, 0, MatrixKind::covariance_matrix, nu4)(0, 0, 0, 0);
    cmp.theory_var_corr =
        eigenvalue_clt_block(model, config.n, 0, MatrixKind::correlation_matrix, nu4)(0, 0, 0, 0);
    const NormalizationEffect eff = normalization_effect(model, config.n, nu4);
    cmp.effective_term = eff.effective_term;
    cmp.full_delta = eff.full_delta;
    cmp.sign_agreement = (cmp.full_delta < 0.0) == (cmp.empirical_delta < 0.0);
    return cmp;
}

nlohmann::json NormalizationComparison::to_json() const {
    return nlohmann::json{{"phi_cov", phi_cov},
                          {"phi_corr", phi_corr},
                          {"first_order_equal", first_order_equal},
                          {"empirical_var_theta_cov", var_theta_cov},
                          {"empirical_var_theta_corr", var_theta_corr},
                          {"empirical_delta", empirical_delta},
                          {"theory_var_cov", theory_var_cov},
                          {"theory_var_corr", theory_var_corr},
                          {"effective_term", effective_term},
                          {"full_delta", full_delta},
                          {"sign_verdict", sign_agreement ? "PASS" : "FAIL"}};
}

std::string records_to_csv(const std::vector<ReplicationRecord>& records,
                           const ExperimentConfig& config) {
    const int M = config.model.M();
    const int K = config.model.K();
    std::string out = "# spike-limits version=" + std::string(kVersion) +
                      " config_hash=" + config.config_hash() + "\n";
    out += "rep,kind";
    for (int j = 1; j <= M; ++j) out += ",lambda_" + std::to_string(j);
    for (int j = 1; j <= M; ++j) out += ",theta_" + std::to_string(j);
    const bool single_proj = config.projections.size() == 1;
    for (const auto& proj : config.projections)
        for (int k = 1; k <= K; ++k)
            out += single_proj ? ",proj_" + std::to_string(k)
                               : ",proj_" + proj.name + "_" + std::to_string(k);
    out += "\n";
    for (const auto& rec : records) {
        out += std::to_string(rec.rep_index) + "," + to_string(rec.kind);
        for (double v : rec.lambda) out += "," + fmt(v);
        for (double v : rec.theta) out += "," + fmt(v);
        for (const auto& per_spike : rec.proj)
            for (double v : per_spike) out += "," + fmt(v);
        out += "\n";
    }
    return out;
}

std::string plot_data_to_csv(const std::vector<ReplicationRecord>& records,
                             const ExperimentConfig& config, const TheoryBundle& theory) {
    constexpr int kBins = 40;
    constexpr int kCurvePoints = 200;
    std::string out = "# spike-limits version=" + std::string(kVersion) +
                      " config_hash=" + config.config_hash() + "\n";
    out += "statistic,kind,series,x0,x1,value\n";
    for (const StatTarget& target : theory.targets) {
        std::vector<double> values;
        for (const auto& rec : records) {
            if (rec.kind != target.kind) continue;
            values.push_back(target.scale * (stat_value(rec, config, target) - target.center));
        }
        if (values.empty()) continue;
        double lo = *std::min_element(values.begin(), values.end());
        double hi = *std::max_element(values.begin(), values.end());
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double width = (hi - lo) / kBins;
        std::vector<int> counts(kBins, 0);
        for (double v : values) {
            int b = static_cast<int>((v - lo) / width);
            if (b >= kBins) b = kBins - 1;
            if (b < 0) b = 0;
            ++counts[b];
        }
        const std::string prefix = target.name + "," + to_string(target.kind);
        for (int b = 0; b < kBins; ++b)
            out += prefix + ",hist," + fmt(lo + b * width) + "," + fmt(lo + (b + 1) * width) +
                   "," + std::to_string(counts[b]) + "\n";
        if (target.variance >= 1e-10) {
            const double sigma = std::sqrt(target.variance);
            for (int i = 0; i < kCurvePoints; ++i) {
                const double x = -4.0 * sigma + 8.0 * sigma * i / (kCurvePoints - 1);
                const double dens = std::exp(-0.5 * x * x / target.variance) /
                                    (sigma * std::sqrt(2.0 * std::numbers::pi));
                out += prefix + ",theory," + fmt(x) + "," + fmt(x) + "," + fmt(dens) + "\n";
            }
        }
    }
    return out;
}

}  // namespace spikelimits
