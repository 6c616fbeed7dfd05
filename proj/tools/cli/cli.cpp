#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "r2d2surv/engine.hpp"
#include "r2d2surv/errors.hpp"
#include "r2d2surv/io.hpp"
#include "r2d2surv/mediation.hpp"
#include "r2d2surv/metrics.hpp"
#include "r2d2surv/prior.hpp"
#include "r2d2surv/simharness.hpp"

namespace r2d2surv::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kOutputEnv = "R2D2SURV_OUTPUT_DIR";

struct ChainFlags {
    std::string profile = "desk";
    std::optional<int> iterations;
    std::optional<int> burn_in;
    std::optional<int> thin;
};

struct FitOptions {
    std::string data;
    std::string prior = "r2d2";
    double a = 0.5;
    double b = 0.5;
    double coef_var = 100.0;
    std::string init = "ridge";
    std::optional<double> warmup_fraction;
    ChainFlags chain;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

struct SimulateOptions {
    int p = 100;
    double rho = 0.5;
    int replicates = 10;
    std::vector<std::string> methods{"r2d2(0.5,0.5)", "horseshoe"};
    std::string external;
    ChainFlags chain;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out = ".";
};

struct MediateOptions {
    std::string outcome;
    std::string mediators;
    std::string exposures;
    std::vector<std::string> continuous;
    double variance_target = 0.70;
    std::optional<double> mean_age;
    bool full_predictor = false;
    std::optional<int> iterations;
    std::optional<int> burn_in;
    std::optional<int> thin;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out = ".";
};

struct GbpOptions {
    double a = 0.5;
    double b = 0.5;
    double theta = 1.0;
    std::string out;
};

// Error raised for invalid flag combinations found after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(bool quiet, bool verbose) {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_st>();
    auto log = std::make_shared<spdlog::logger>("r2d2surv", sink);
    log->set_pattern("[%l] %v");
    log->set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);
    return log;
}

void add_chain_flags(CLI::App* cmd, ChainFlags& f) {
    cmd->add_option("--profile", f.profile, "Chain length preset")
        ->check(CLI::IsMember({"desk", "full"}))
        ->capture_default_str();
    cmd->add_option("--iterations", f.iterations, "Total iterations (overrides the profile)");
    cmd->add_option("--burn-in", f.burn_in, "Burn-in iterations (overrides the profile)");
    cmd->add_option("--thin", f.thin, "Thinning interval (overrides the profile)");
}

SamplerConfig chain_config(const ChainFlags& f, std::uint64_t seed) {
    SamplerConfig c = f.profile == "full" ? SamplerConfig{} : SamplerConfig::desk();
    if (f.iterations) c.iterations = *f.iterations;
    if (f.burn_in) c.burn_in = *f.burn_in;
    if (f.thin) c.thin = *f.thin;
    c.seed = seed;
    return c;
}

json summary_json(const ParamSummary& s) {
    return json{{"median", s.median}, {"mean", s.mean}, {"sd", s.sd}, {"lower", s.lower}, {"upper", s.upper}};
}

json gbp_json(const GBPFit& fit) {
    return json{{"a_star", fit.params.a_star},
                {"b_star", fit.params.b_star},
                {"c_star", fit.params.c_star},
                {"d_star", fit.params.d_star},
                {"divergence", fit.divergence},
                {"converged", fit.converged},
                {"ill_conditioned", fit.ill_conditioned}};
}

json chain_json(const SamplerConfig& c) {
    return json{{"iterations", c.iterations}, {"burn_in", c.burn_in}, {"thin", c.thin},
                {"retained", c.retained()},   {"t1", c.t1},           {"t2", c.t2},
                {"mu_b0", c.mu_b0},           {"sig2_b0", c.sig2_b0}, {"warmup_fraction", c.warmup_fraction}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path prepare_dir(const std::string& out) {
    fs::path dir(out.empty() ? "." : out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
    if (!seed) throw UsageError("--seed is required");
    return *seed;
}

std::string trace_csv(const PosteriorDraws& d) {
    std::string out = "iteration";
    for (const auto& n : d.names) out += "," + n;
    out += "\n";
    for (Eigen::Index r = 0; r < d.draws.rows(); ++r) {
        out += std::to_string(d.burn_in + (r + 1) * d.thin);
        for (Eigen::Index c = 0; c < d.draws.cols(); ++c) out += "," + format_number(d.draws(r, c));
        out += "\n";
    }
    return out;
}

// ---- fit ---------------------------------------------------------------------------

int cmd_fit(const FitOptions& o, spdlog::logger& log) {
    const std::uint64_t seed = require_seed(o.seed);
    SurvivalDataset data = read_survival_csv(o.data);
    log.info("fit: n = {}, p = {}, events = {}", data.n(), data.p(), data.n_events());

    SamplerConfig config = chain_config(o.chain, seed);
    config.hyper = {o.a, o.b};
    config.coef_prior_var = o.coef_var;
    config.init = o.init == "null" ? InitMode::null_model : InitMode::ridge;
    if (o.warmup_fraction) config.warmup_fraction = *o.warmup_fraction;
    try {
        config.validate();
    } catch (const InvalidParams& e) {
        throw UsageError(e.what());
    }

    const double theta_mle = weibull_mle_theta(data);
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "fit";
    doc["seed"] = seed;
    doc["prior"] = o.prior;
    doc["data"] = json{{"path", fs::path(o.data).filename().string()},
                       {"n", data.n()},
                       {"p", data.p()},
                       {"events", data.n_events()}};
    doc["theta_mle"] = theta_mle;

    ShrinkageKind kind = ShrinkageKind::r2d2;
    if (o.prior == "r2d2") {
        doc["hyper"] = json{{"a", o.a}, {"b", o.b}};
        GBPFit fit = prepare_r2d2(data, config);
        log.info("GBP fit: a* = {:.4g}, b* = {:.4g}, d* = {:.4g}, divergence = {:.3g}", fit.params.a_star,
                 fit.params.b_star, fit.params.d_star, fit.divergence);
        if (fit.ill_conditioned) log.warn("GBP approximation is ill-conditioned for a = {}, b = {}", o.a, o.b);
        doc["gbp"] = gbp_json(fit);
    } else if (o.prior == "horseshoe") {
        kind = ShrinkageKind::horseshoe;
    } else {
        kind = ShrinkageKind::gaussian;
        doc["coef_prior_var"] = o.coef_var;
    }
    doc["chain"] = chain_json(config);

    Rng rng(seed);
    log.info("running {} chain: {} iterations", o.prior, config.iterations);
    PosteriorDraws draws = run_weibull_chain(data, config, kind, rng);
    for (const auto& w : draws.warnings) log.warn("{}", w);

    json acc = json::object();
    for (const auto& [k, v] : draws.acceptance) acc[k] = v;
    doc["acceptance"] = acc;

    json params = json::array();
    for (Eigen::Index c = 0; c < draws.coef_offset; ++c) {
        json row{{"name", draws.names[static_cast<std::size_t>(c)]}};
        row.update(summary_json(draws.summary[static_cast<std::size_t>(c)]));
        params.push_back(row);
    }
    doc["parameters"] = params;

    const SelectionScore sel = significance_and_scores(draws);
    json coefs = json::array();
    for (Eigen::Index j = 0; j < draws.n_coef; ++j) {
        const ParamSummary& s = draws.coefficient_summary(j);
        const double sd = data.col_sds()[j];
        coefs.push_back(json{{"name", data.names()[static_cast<std::size_t>(j)]},
                             {"median", s.median},
                             {"mean", s.mean},
                             {"sd", s.sd},
                             {"lower", s.lower},
                             {"upper", s.upper},
                             {"significant", sel.significant[j] == 1},
                             {"score", sel.score[j]},
                             {"raw_median", s.median / sd},
                             {"raw_lower", s.lower / sd},
                             {"raw_upper", s.upper / sd}});
    }
    doc["coefficients"] = coefs;

    if (draws.has("W")) {
        Eigen::VectorXd r2 = bayes_r2_posterior(draws);
        std::vector<double> v(r2.data(), r2.data() + r2.size());
        doc["r2"] = json{{"median", quantile(v, 0.5)},  {"q025", quantile(v, 0.025)}, {"q25", quantile(v, 0.25)},
                         {"q75", quantile(v, 0.75)},    {"q975", quantile(v, 0.975)}, {"mean", r2.mean()}};
    }
    doc["warnings"] = draws.warnings;

    const fs::path dir = prepare_dir(o.out);
    write_file_atomic(dir / "fit_trace.csv", trace_csv(draws));
    write_file_atomic(dir / "fit_summary.json", dump(doc));
    log.info("wrote {} and {}", (dir / "fit_summary.json").string(), (dir / "fit_trace.csv").string());
    return kOk;
}

// ---- simulate ------------------------------------------------------------------------

int cmd_simulate(const SimulateOptions& o, spdlog::logger& log) {
    const std::uint64_t seed = require_seed(o.seed);
    SimDesign design;
    std::vector<MethodSpec> methods;
    BenchmarkOptions options;
    try {
        design = SimDesign::standard(o.p, o.rho, o.replicates);
        design.validate();
        for (const auto& m : o.methods) methods.push_back(parse_method(m));
        options.chain = chain_config(o.chain, seed);
        options.chain.validate();
    } catch (const InvalidParams& e) {
        throw UsageError(e.what());
    }
    options.threads = std::max(1, o.threads);

    std::optional<TextTable> external;
    if (!o.external.empty()) external = read_text_csv(o.external);

    log.info("simulate: {} x {} replicates x {} methods, {} iterations, {} threads", design.label(),
             design.replicates, methods.size(), options.chain.iterations, options.threads);
    BenchmarkResult result = run_benchmark({design}, methods, options, seed);
    if (external) {
        result.external = read_external_results(*external);
    }

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "simulate";
    doc["seed"] = seed;
    doc["design"] = json{{"p", design.p},
                         {"rho", design.rho},
                         {"n_total", design.total_n()},
                         {"n_uncensored", design.kept()},
                         {"log_theta_true", design.log_theta_true},
                         {"replicates", design.replicates},
                         {"label", design.label()}};
    doc["chain"] = chain_json(options.chain);
    json reps = json::array();
    for (const auto& r : result.replicates) {
        json row{{"method", r.method}, {"setting", r.setting}, {"replicate", r.replicate}, {"ok", r.ok}};
        if (r.ok) {
            row["sse_overall"] = r.sse.overall;
            row["sse_nonzero"] = r.sse.nonzero;
            row["sse_zero"] = r.sse.zero;
            row["auc"] = r.auc;
            row["coverage"] = r.coverage;
            row["c_index"] = r.c_index;
            row["r2_median"] = r.r2_median;
            row["acceptance_beta0"] = r.acceptance_beta0;
            row["acceptance_log_theta"] = r.acceptance_log_theta;
        } else {
            row["error"] = r.error;
            log.warn("{} replicate {} failed: {}", r.method, r.replicate, r.error);
        }
        reps.push_back(row);
    }
    doc["replicates"] = reps;
    json cells = json::array();
    for (const auto& c : result.cells) {
        auto ms = [](const MetricSummary& m) { return json{{"mean", m.mean}, {"se", m.se}}; };
        cells.push_back(json{{"method", c.method},
                             {"setting", c.setting},
                             {"completed", c.completed},
                             {"failed", c.failed},
                             {"sse_overall", ms(c.sse_overall)},
                             {"sse_nonzero", ms(c.sse_nonzero)},
                             {"sse_zero", ms(c.sse_zero)},
                             {"auc", ms(c.auc)},
                             {"coverage", ms(c.coverage)},
                             {"c_index", ms(c.c_index)}});
        log.info("{}: SSE {:.3f} (nonzero {:.3f}, zero {:.4f}), AUC {:.3f}, coverage {:.3f}, C {:.3f}", c.method,
                 c.sse_overall.mean, c.sse_nonzero.mean, c.sse_zero.mean, c.auc.mean, c.coverage.mean,
                 c.c_index.mean);
    }
    doc["cells"] = cells;

    const fs::path dir = prepare_dir(o.out);
    write_file_atomic(dir / "simulate_summary.csv", benchmark_csv(result));
    write_file_atomic(dir / "simulate_replicates.csv", replicates_csv(result));
    write_file_atomic(dir / "simulate.json", dump(doc));
    log.info("wrote results to {}", dir.string());
    return kOk;
}

// ---- mediate -------------------------------------------------------------------------

std::vector<std::string> column_names(const CsvTable& t) { return t.header; }

int cmd_mediate(const MediateOptions& o, spdlog::logger& log) {
    const std::uint64_t seed = require_seed(o.seed);
    const CsvTable outcome = read_csv(o.outcome);
    const CsvTable mediators = read_csv(o.mediators);
    const CsvTable exposures = read_csv(o.exposures);
    const Eigen::Index t_col = outcome.find("time");
    const Eigen::Index s_col = outcome.find("status");
    if (t_col < 0) throw ParseError(1, "missing required column 'time' in " + o.outcome);
    if (s_col < 0) throw ParseError(1, "missing required column 'status' in " + o.outcome);
    const Eigen::Index n = outcome.values.rows();
    if (mediators.values.rows() != n || exposures.values.rows() != n)
        throw LengthMismatch("outcome, mediator and exposure files must have the same number of rows");

    MediationInputs in;
    in.times = outcome.values.col(t_col);
    in.events.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = outcome.values(i, s_col);
        if (s != 0.0 && s != 1.0) throw ParseError(static_cast<std::size_t>(i) + 2, "status must be 0 or 1");
        if (!(in.times[i] > 0.0)) throw ParseError(static_cast<std::size_t>(i) + 2, "time must be positive");
        in.events[i] = static_cast<int>(s);
    }
    in.mediators = mediators.values;
    in.mediator_names = column_names(mediators);
    in.exposures = exposures.values;
    in.exposure_names = column_names(exposures);
    in.mediator_binary.resize(in.mediators.cols());
    for (Eigen::Index j = 0; j < in.mediators.cols(); ++j) {
        const auto& name = in.mediator_names[static_cast<std::size_t>(j)];
        const bool forced = std::find(o.continuous.begin(), o.continuous.end(), name) != o.continuous.end();
        const bool binary = (in.mediators.col(j).array() == 0.0 || in.mediators.col(j).array() == 1.0).all();
        in.mediator_binary[j] = binary && !forced ? 1 : 0;
    }
    for (const auto& name : o.continuous)
        if (std::find(in.mediator_names.begin(), in.mediator_names.end(), name) == in.mediator_names.end())
            throw UsageError("--continuous names unknown mediator '" + name + "'");
    if (o.mean_age) in.mean_age_years = *o.mean_age;

    MediationConfig config;
    config.variance_target = o.variance_target;
    config.full_predictor = o.full_predictor;
    config.threads = std::max(1, o.threads);
    if (o.iterations) config.outcome.iterations = config.mediator.iterations = *o.iterations;
    if (o.burn_in) config.outcome.burn_in = config.mediator.burn_in = *o.burn_in;
    if (o.thin) config.outcome.thin = config.mediator.thin = *o.thin;
    try {
        if (!(o.variance_target > 0.0 && o.variance_target <= 1.0))
            throw InvalidParams("--variance-target must be in (0, 1]");
        config.outcome.validate();
        config.mediator.validate();
    } catch (const InvalidParams& e) {
        throw UsageError(e.what());
    }

    log.info("mediate: n = {}, {} mediators, {} exposures", n, in.mediators.cols(), in.exposures.cols());
    MediationResult res = run_mediation(in, config, seed);
    for (const auto& w : res.warnings) log.warn("{}", w);
    log.info("PCA kept {} components ({:.1f}% of variance)", res.pca.p_x, 100.0 * res.pca.explained_fraction);

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "mediate";
    doc["seed"] = seed;
    doc["n"] = n;
    json med = json::array();
    for (std::size_t j = 0; j < in.mediator_names.size(); ++j)
        med.push_back(json{{"name", in.mediator_names[j]},
                           {"type", in.mediator_binary[static_cast<Eigen::Index>(j)] ? "binary" : "continuous"}});
    doc["mediators"] = med;
    std::vector<double> eig(res.pca.eigenvalues.data(), res.pca.eigenvalues.data() + res.pca.eigenvalues.size());
    doc["pca"] = json{{"variance_target", o.variance_target},
                      {"p_x", res.pca.p_x},
                      {"explained_fraction", res.pca.explained_fraction},
                      {"eigenvalues", eig}};
    doc["draws"] = res.total.rows();
    json acc = json::object();
    for (const auto& [k, v] : res.outcome.acceptance) acc[k] = v;
    doc["outcome_acceptance"] = acc;
    doc["full_predictor"] = o.full_predictor;
    if (res.has_delta) doc["mean_age_years"] = in.mean_age_years;
    json effects = json::array();
    for (const auto& e : res.effects) {
        json row{{"name", e.name},
                 {"indirect", summary_json(e.indirect)},
                 {"direct", summary_json(e.direct)},
                 {"total", summary_json(e.total)},
                 {"significant_indirect", e.significant_indirect},
                 {"significant_direct", e.significant_direct},
                 {"significant_total", e.significant_total},
                 {"proportion_mediated", e.proportion_mediated}};
        if (res.has_delta) {
            row["delta_days"] = json{{"indirect", summary_json(e.delta_indirect)},
                                     {"direct", summary_json(e.delta_direct)},
                                     {"total", summary_json(e.delta_total)}};
        }
        effects.push_back(row);
    }
    doc["effects"] = effects;
    doc["warnings"] = res.warnings;

    std::ostringstream eff;
    eff << "covariate,indirect,indirect_lower,indirect_upper,direct,direct_lower,direct_upper,total,total_lower,"
           "total_upper,significant_total\n";
    auto triple = [](const ParamSummary& s) {
        return format_number(s.median) + "," + format_number(s.lower) + "," + format_number(s.upper);
    };
    for (const auto& e : res.effects)
        eff << e.name << "," << triple(e.indirect) << "," << triple(e.direct) << "," << triple(e.total) << ","
            << (e.significant_total ? 1 : 0) << "\n";

    const fs::path dir = prepare_dir(o.out);
    write_file_atomic(dir / "mediate_effects.csv", eff.str());
    if (res.has_delta) {
        std::ostringstream dd;
        dd << "covariate,indirect_days,indirect_lower,indirect_upper,direct_days,direct_lower,direct_upper,"
              "total_days,total_lower,total_upper,significant_total\n";
        for (const auto& e : res.effects)
            dd << e.name << "," << triple(e.delta_indirect) << "," << triple(e.delta_direct) << ","
               << triple(e.delta_total) << "," << (e.significant_total ? 1 : 0) << "\n";
        write_file_atomic(dir / "mediate_delta_days.csv", dd.str());
    }
    write_file_atomic(dir / "mediate.json", dump(doc));
    log.info("wrote results to {}", dir.string());
    return kOk;
}

// ---- approx-gbp ----------------------------------------------------------------------

int cmd_approx_gbp(const GbpOptions& o, spdlog::logger& log) {
    if (!(o.a > 0.0) || !(o.b > 0.0) || !(o.theta > 0.0)) throw UsageError("--a, --b and --theta must be positive");
    GBPFit fit = fit_gbp_approx(o.theta, R2D2Hyper{o.a, o.b});
    if (fit.ill_conditioned) log.warn("GBP approximation is ill-conditioned for a = {}, b = {}", o.a, o.b);
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "approx-gbp";
    doc["a"] = o.a;
    doc["b"] = o.b;
    doc["theta"] = o.theta;
    doc["a_star"] = fit.params.a_star;
    doc["b_star"] = fit.params.b_star;
    doc["d_star"] = fit.params.d_star;
    doc["divergence"] = fit.divergence;
    doc["converged"] = fit.converged;
    doc["ill_conditioned"] = fit.ill_conditioned;
    const std::string text = dump(doc);
    if (o.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        const fs::path dir = prepare_dir(o.out);
        write_file_atomic(dir / "approx_gbp.json", text);
        log.info("wrote {}", (dir / "approx_gbp.json").string());
    }
    return kOk;
}

void write_diagnostics(const std::string& out, const std::string& command, const std::optional<std::uint64_t>& seed,
                       const std::string& what, spdlog::logger& log) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = command;
    doc["seed"] = seed ? json(*seed) : json(nullptr);
    doc["error"] = what;
    try {
        const fs::path dir = prepare_dir(out);
        write_file_atomic(dir / "diagnostics.json", dump(doc));
        log.error("diagnostics written to {}", (dir / "diagnostics.json").string());
    } catch (const std::exception& e) {
        log.error("could not write diagnostics: {}", e.what());
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Bayesian R2D2 shrinkage for censored Weibull regression"};
    app.name("r2d2surv");
    app.set_config("--config", "", "TOML configuration file (command-line flags take precedence)");
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    bool verbose = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");
    app.add_flag("-v,--verbose", verbose, "Log debug messages");
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a shrinkage Weibull regression to a survival CSV");
    fit_cmd->add_option("--data", fit.data, "CSV with time, status and covariate columns")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--prior", fit.prior, "Coefficient prior")
        ->check(CLI::IsMember({"r2d2", "horseshoe", "gaussian"}))
        ->capture_default_str();
    fit_cmd->add_option("--a", fit.a, "Beta(a, b) shape a on the scaled R^2")->capture_default_str();
    fit_cmd->add_option("--b", fit.b, "Beta(a, b) shape b on the scaled R^2")->capture_default_str();
    fit_cmd->add_option("--coef-var", fit.coef_var, "Coefficient variance of the gaussian prior")
        ->capture_default_str();
    fit_cmd->add_option("--init", fit.init, "Chain starting point")
        ->check(CLI::IsMember({"ridge", "null"}))
        ->capture_default_str();
    fit_cmd->add_option("--warmup-fraction", fit.warmup_fraction, "Fraction of burn-in with the relaxed R2D2 block");
    add_chain_flags(fit_cmd, fit.chain);
    fit_cmd->add_option("--seed", fit.seed, "Random seed (required)");
    fit_cmd->add_option("-o,--out", fit.out, "Output directory")->envname(kOutputEnv)->capture_default_str();

    SimulateOptions sim;
    sim.threads = hw;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the synthetic benchmark");
    sim_cmd->add_option("--p", sim.p, "Number of covariates")->capture_default_str();
    sim_cmd->add_option("--rho", sim.rho, "AR(1) correlation")->capture_default_str();
    sim_cmd->add_option("--replicates", sim.replicates, "Datasets per setting")->capture_default_str();
    sim_cmd->add_option("--methods", sim.methods, "Methods: horseshoe, r2d2(a,b) or r2d2:a:b")
        ->capture_default_str();
    sim_cmd->add_option("--external-results", sim.external, "CSV of external comparator metrics")
        ->check(CLI::ExistingFile);
    add_chain_flags(sim_cmd, sim.chain);
    sim_cmd->add_option("--seed", sim.seed, "Master seed (required)");
    sim_cmd->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim.out, "Output directory")->envname(kOutputEnv)->capture_default_str();

    MediateOptions med;
    med.threads = hw;
    auto* med_cmd = app.add_subcommand("mediate", "Two-stage mediation analysis");
    med_cmd->add_option("--outcome", med.outcome, "CSV with time and status")->required()->check(CLI::ExistingFile);
    med_cmd->add_option("--mediators", med.mediators, "CSV of mediators")->required()->check(CLI::ExistingFile);
    med_cmd->add_option("--exposures", med.exposures, "CSV of exposures")->required()->check(CLI::ExistingFile);
    med_cmd->add_option("--continuous", med.continuous, "Treat these 0/1 mediators as continuous");
    med_cmd->add_option("--variance-target", med.variance_target, "PCA variance fraction")->capture_default_str();
    med_cmd->add_option("--mean-age", med.mean_age, "Mean cohort age in years, enables the days table");
    med_cmd->add_flag("--full-predictor", med.full_predictor, "Evaluate the logistic weight at the full predictor");
    med_cmd->add_option("--iterations", med.iterations, "Iterations per chain");
    med_cmd->add_option("--burn-in", med.burn_in, "Burn-in per chain");
    med_cmd->add_option("--thin", med.thin, "Thinning per chain");
    med_cmd->add_option("--seed", med.seed, "Random seed (required)");
    med_cmd->add_option("--threads", med.threads, "Worker threads")->capture_default_str();
    med_cmd->add_option("-o,--out", med.out, "Output directory")->envname(kOutputEnv)->capture_default_str();

    GbpOptions gbp;
    auto* gbp_cmd = app.add_subcommand("approx-gbp", "Fit the generalized beta prime approximation of the W prior");
    gbp_cmd->add_option("--a", gbp.a, "Beta shape a")->required();
    gbp_cmd->add_option("--b", gbp.b, "Beta shape b")->required();
    gbp_cmd->add_option("--theta", gbp.theta, "Weibull shape")->required();
    gbp_cmd->add_option("-o,--out", gbp.out, "Output directory (default: print to stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
        return kUsage;
    }

    auto log = make_logger(quiet, verbose);
    std::string command;
    std::string out;
    std::optional<std::uint64_t> seed;
    if (fit_cmd->parsed()) {
        command = "fit", out = fit.out, seed = fit.seed;
    } else if (sim_cmd->parsed()) {
        command = "simulate", out = sim.out, seed = sim.seed;
    } else if (med_cmd->parsed()) {
        command = "mediate", out = med.out, seed = med.seed;
    } else {
        command = "approx-gbp", out = gbp.out;
    }

    try {
        if (command == "fit") return cmd_fit(fit, *log);
        if (command == "simulate") return cmd_simulate(sim, *log);
        if (command == "mediate") return cmd_mediate(med, *log);
        return cmd_approx_gbp(gbp, *log);
    } catch (const UsageError& e) {
        log->error("{}", e.what());
        std::fprintf(stderr, "\n%s", app.get_subcommand(command)->help("r2d2surv").c_str());
        return kUsage;
    } catch (const DataError& e) {
        log->error("data error: {}", e.what());
        return kDataError;
    } catch (const ChainError& e) {
        log->error("chain failed: {}", e.what());
        write_diagnostics(out, command, seed, e.what(), *log);
        return kChainError;
    } catch (const NoConvergence& e) {
        log->error("no convergence: {}", e.what());
        write_diagnostics(out, command, seed, e.what(), *log);
        return kChainError;
    } catch (const NonFiniteResult& e) {
        log->error("numerical failure: {}", e.what());
        write_diagnostics(out, command, seed, e.what(), *log);
        return kChainError;
    } catch (const std::exception& e) {
        log->error("{}", e.what());
        return kUsage;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace r2d2surv::cli
