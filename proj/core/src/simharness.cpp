#include "r2d2surv/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <tuple>
#include <sstream>
#include <thread>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

const double kBlock1[5] = {2.5, -2.0, 0.5, -1.0, 1.5};
const double kBlock2[5] = {-1.5, -0.5, 2.0, -2.5, 1.0};

std::string trim_copy(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    if (first == std::string::npos) return {};
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidParams("cannot parse " + what + " '" + text + "'");
    }
    if (used != text.size()) throw InvalidParams("cannot parse " + what + " '" + text + "'");
    return v;
}

MetricSummary mean_se(const std::vector<double>& v) {
    MetricSummary m;
    if (v.empty()) {
        m.mean = m.se = std::nan("");
        return m;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    m.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return m;
}

}  // namespace

// ---- designs -----------------------------------------------------------------------

SimDesign SimDesign::standard(int p, double rho, int replicates) {
    SimDesign d;
    d.p = p;
    d.rho = rho;
    d.n_uncensored = p >= 500 ? 100 : 60;
    d.replicates = replicates;
    return d;
}

int SimDesign::total_n() const { return static_cast<int>(std::lround(n_uncensored / censor_quantile)); }

int SimDesign::kept() const { return static_cast<int>(std::lround(censor_quantile * total_n())); }

std::string SimDesign::label() const {
    std::ostringstream s;
    s << "p" << p << "_rho" << rho;
    return s.str();
}

void SimDesign::validate() const {
    if (p < 20) throw InvalidParams("simulation designs need p >= 20");
    if (!(std::abs(rho) < 1.0)) throw InvalidParams("AR(1) correlation must satisfy |rho| < 1");
    if (n_uncensored < 2) throw InvalidParams("need at least 2 uncensored observations");
    if (!(censor_quantile > 0.0 && censor_quantile <= 1.0)) throw InvalidParams("censor_quantile must be in (0, 1]");
    if (replicates < 0) throw InvalidParams("replicates must be non-negative");
}

Eigen::VectorXd beta_pattern(int p) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    auto place = [&](int start, const double* block, double sign) {
        for (int k = 0; k < 5; ++k) beta[start + k] = sign * block[k];
    };
    if (p >= 500) {
        place(5, kBlock1, 1.0);
        place(15, kBlock2, 1.0);
        place(25, kBlock1, -1.0);
        place(35, kBlock2, -1.0);
    } else {
        if (p < 20) throw InvalidParams("coefficient pattern needs p >= 20");
        place(5, kBlock1, 1.0);
        place(15, kBlock2, 1.0);
    }
    return beta;
}

Eigen::MatrixXd generate_ar1(Eigen::Index n, Eigen::Index p, double rho, Rng& rng) {
    if (!(std::abs(rho) < 1.0)) throw InvalidParams("AR(1) correlation must satisfy |rho| < 1");
    Eigen::MatrixXd x(n, p);
    const double innovation = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p == 0) break;
        x(i, 0) = rng.normal();
        for (Eigen::Index j = 1; j < p; ++j) x(i, j) = rho * x(i, j - 1) + innovation * rng.normal();
    }
    return x;
}

SimDataset generate_dataset(const SimDesign& design, Rng& rng) {
    design.validate();
    const int n = design.total_n();
    SimDataset sim;
    sim.beta0_true = rng.normal();
    sim.beta_true = beta_pattern(design.p);
    Eigen::MatrixXd x = generate_ar1(n, design.p, design.rho, rng);
    const double theta = std::exp(design.log_theta_true);

    Eigen::VectorXd times(n);
    for (int i = 0; i < n; ++i) {
        const double eta = sim.beta0_true + x.row(i).dot(sim.beta_true);
        times[i] = std::exp(eta) * std::pow(rng.exponential(), 1.0 / theta);
    }
    std::vector<double> sorted(times.data(), times.data() + n);
    std::sort(sorted.begin(), sorted.end());
    sim.threshold = sorted[static_cast<std::size_t>(design.kept() - 1)];

    Eigen::VectorXi events(n);
    for (int i = 0; i < n; ++i) {
        if (times[i] > sim.threshold) {
            times[i] = sim.threshold;
            events[i] = 0;
        } else {
            events[i] = 1;
        }
    }
    sim.data = SurvivalDataset::from_raw(std::move(times), std::move(events), std::move(x));
    return sim;
}

// ---- methods -----------------------------------------------------------------------

MethodSpec parse_method(const std::string& text) {
    std::string s = trim_copy(text);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    MethodSpec m;
    if (lower == "horseshoe" || lower == "hs") {
        m.name = "horseshoe";
        m.kind = MethodKind::horseshoe;
        return m;
    }
    if (lower.rfind("r2d2", 0) == 0) {
        std::string rest = lower.substr(4);
        char open = rest.empty() ? '\0' : rest.front();
        if (open == '(' && rest.back() == ')') rest = rest.substr(1, rest.size() - 2);
        else if (open == ':') rest = rest.substr(1);
        else throw InvalidParams("expected r2d2(a,b) or r2d2:a:b, got '" + s + "'");
        const auto sep = rest.find_first_of(",:");
        if (sep == std::string::npos) throw InvalidParams("expected two hyperparameters in '" + s + "'");
        m.kind = MethodKind::r2d2;
        m.hyper.a = parse_double(trim_copy(rest.substr(0, sep)), "R2D2 a");
        m.hyper.b = parse_double(trim_copy(rest.substr(sep + 1)), "R2D2 b");
        if (!(m.hyper.a > 0.0) || !(m.hyper.b > 0.0)) throw InvalidParams("R2D2 hyperparameters must be positive");
        std::ostringstream name;
        name << "r2d2_" << m.hyper.a << "_" << m.hyper.b;
        m.name = name.str();
        return m;
    }
    throw InvalidParams("unknown method '" + s + "'");
}

std::uint64_t label_hash(const std::string& label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---- evaluation --------------------------------------------------------------------

ReplicateResult evaluate_fit(const PosteriorDraws& draws, const SimDataset& sim) {
    const SurvivalDataset& data = sim.data;
    const Eigen::Index p = data.p();
    if (draws.n_coef != p) throw DimensionMismatch("draws and data differ in the number of coefficients");

    // Coefficients back on the generating (raw covariate) scale.
    Eigen::MatrixXd raw = draws.coefficients();
    for (Eigen::Index j = 0; j < p; ++j) raw.col(j) /= data.col_sds()[j];

    ReplicateResult r;
    Eigen::VectorXd median(p);
    Eigen::VectorXd lower(p);
    Eigen::VectorXd upper(p);
    Eigen::VectorXd median_std(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const ParamSummary s = summarize(raw.col(j));
        median[j] = s.median;
        lower[j] = s.lower;
        upper[j] = s.upper;
        median_std[j] = draws.coefficient_summary(j).median;
    }
    r.sse = sse_decomposition(median, sim.beta_true);
    Eigen::VectorXi truth = (sim.beta_true.array() != 0.0).cast<int>();
    const SelectionScore sel = significance_and_scores(raw);
    r.auc = selection_auc(sel.score, truth);
    r.coverage = coverage(lower, upper, sim.beta_true);
    const Eigen::VectorXd risk = -(data.x() * median_std);
    r.c_index = c_index(risk, data.times(), data.events());
    if (draws.has("W")) {
        const Eigen::VectorXd r2 = bayes_r2_posterior(draws);
        r.r2_median = summarize(r2).median;
    }
    if (auto it = draws.acceptance.find("beta0"); it != draws.acceptance.end()) r.acceptance_beta0 = it->second;
    if (auto it = draws.acceptance.find("log_theta"); it != draws.acceptance.end()) r.acceptance_log_theta = it->second;
    r.ok = true;
    return r;
}

BenchmarkResult run_benchmark(const std::vector<SimDesign>& designs, const std::vector<MethodSpec>& methods,
                              const BenchmarkOptions& options, std::uint64_t master_seed) {
    struct Task {
        std::size_t design;
        int replicate;
        std::size_t method;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < designs.size(); ++d) {
        designs[d].validate();
        for (int rep = 0; rep < designs[d].replicates; ++rep)
            for (std::size_t m = 0; m < methods.size(); ++m) tasks.push_back({d, rep, m});
    }
    options.chain.validate();

    BenchmarkResult result;
    result.replicates.resize(tasks.size());

    auto run_task = [&](const Task& task) {
        const SimDesign& design = designs[task.design];
        const MethodSpec& method = methods[task.method];
        const std::string label = design.label();
        const auto rep = static_cast<std::uint64_t>(task.replicate);
        ReplicateResult r;
        try {
            Rng data_rng(derive_seed(master_seed, {label_hash(label), rep}));
            const SimDataset sim = generate_dataset(design, data_rng);
            SamplerConfig config = options.chain;
            Rng chain_rng(derive_seed(master_seed, {label_hash(label), rep, label_hash(method.name)}));
            PosteriorDraws draws;
            if (method.kind == MethodKind::r2d2) {
                config.hyper = method.hyper;
                prepare_r2d2(sim.data, config);
                draws = run_r2d2_chain(sim.data, config, chain_rng);
            } else {
                draws = run_horseshoe_chain(sim.data, config, chain_rng);
            }
            r = evaluate_fit(draws, sim);
        } catch (const std::exception& e) {
            r = ReplicateResult{};
            r.ok = false;
            r.error = e.what();
        }
        r.method = method.name;
        r.setting = label;
        r.replicate = task.replicate;
        return r;
    };

    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(tasks.size())));
    if (threads <= 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) result.replicates[t] = run_task(tasks[t]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < tasks.size(); t = next++) result.replicates[t] = run_task(tasks[t]);
            });
        }
        for (auto& th : pool) th.join();
    }
    result.cells = aggregate(result.replicates);
    return result;
}

std::vector<CellSummary> aggregate(const std::vector<ReplicateResult>& replicates) {
    std::vector<CellSummary> cells;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::vector<const ReplicateResult*>> members;
    for (const auto& r : replicates) {
        auto key = std::make_pair(r.method, r.setting);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, cells.size()).first;
            CellSummary c;
            c.method = r.method;
            c.setting = r.setting;
            cells.push_back(c);
            members.emplace_back();
        }
        members[it->second].push_back(&r);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> overall, nonzero, zero, auc, cov, cidx;
        for (const ReplicateResult* r : members[c]) {
            if (!r->ok) {
                ++cells[c].failed;
                continue;
            }
            ++cells[c].completed;
            overall.push_back(r->sse.overall);
            nonzero.push_back(r->sse.nonzero);
            zero.push_back(r->sse.zero);
            auc.push_back(r->auc);
            cov.push_back(r->coverage);
            cidx.push_back(r->c_index);
        }
        cells[c].sse_overall = mean_se(overall);
        cells[c].sse_nonzero = mean_se(nonzero);
        cells[c].sse_zero = mean_se(zero);
        cells[c].auc = mean_se(auc);
        cells[c].coverage = mean_se(cov);
        cells[c].c_index = mean_se(cidx);
    }
    return cells;
}

std::vector<ExternalRow> read_external_results(const TextTable& table) {
    const char* required[] = {"method", "setting", "replicate", "metric", "value"};
    std::ptrdiff_t col[5];
    for (int k = 0; k < 5; ++k) {
        col[k] = table.find(required[k]);
        if (col[k] < 0) throw ParseError(1, std::string("missing required column '") + required[k] + "'");
    }
    std::vector<ExternalRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        ExternalRow r;
        r.method = f[static_cast<std::size_t>(col[0])];
        r.setting = f[static_cast<std::size_t>(col[1])];
        r.metric = f[static_cast<std::size_t>(col[3])];
        try {
            r.replicate = std::stoi(f[static_cast<std::size_t>(col[2])]);
            r.value = parse_double(f[static_cast<std::size_t>(col[4])], "value");
        } catch (const std::exception& e) {
            throw ParseError(i + 2, e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string benchmark_csv(const BenchmarkResult& result) {
    std::ostringstream out;
    out << "method,setting,metric,mean,se,n\n";
    auto row = [&](const std::string& method, const std::string& setting, const char* metric, const MetricSummary& m,
                   int n) {
        out << method << ',' << setting << ',' << metric << ',' << format_number(m.mean) << ','
            << format_number(m.se) << ',' << n << '\n';
    };
    for (const auto& c : result.cells) {
        row(c.method, c.setting, "sse_overall", c.sse_overall, c.completed);
        row(c.method, c.setting, "sse_nonzero", c.sse_nonzero, c.completed);
        row(c.method, c.setting, "sse_zero", c.sse_zero, c.completed);
        row(c.method, c.setting, "auc", c.auc, c.completed);
        row(c.method, c.setting, "coverage", c.coverage, c.completed);
        row(c.method, c.setting, "c_index", c.c_index, c.completed);
    }
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> ext;
    std::vector<std::tuple<std::string, std::string, std::string>> order;
    for (const auto& r : result.external) {
        auto key = std::make_tuple(r.method, r.setting, r.metric);
        auto [it, inserted] = ext.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(r.value);
    }
    for (const auto& key : order) {
        const auto& v = ext[key];
        const MetricSummary m = mean_se(v);
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ',' << format_number(m.mean)
            << ',' << format_number(m.se) << ',' << v.size() << '\n';
    }
    return out.str();
}

std::string replicates_csv(const BenchmarkResult& result) {
    std::ostringstream out;
    out << "method,setting,replicate,ok,sse_overall,sse_nonzero,sse_zero,auc,coverage,c_index,r2_median,"
           "accept_beta0,accept_log_theta\n";
    for (const auto& r : result.replicates) {
        out << r.method << ',' << r.setting << ',' << r.replicate << ',' << (r.ok ? 1 : 0) << ','
            << format_number(r.sse.overall) << ',' << format_number(r.sse.nonzero) << ','
            << format_number(r.sse.zero) << ',' << format_number(r.auc) << ',' << format_number(r.coverage) << ','
            << format_number(r.c_index) << ',' << format_number(r.r2_median) << ','
            << format_number(r.acceptance_beta0) << ',' << format_number(r.acceptance_log_theta) << '\n';
    }
    return out.str();
}

}  // namespace r2d2surv
