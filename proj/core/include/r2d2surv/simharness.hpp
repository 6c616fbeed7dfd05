#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "r2d2surv/engine.hpp"
#include "r2d2surv/io.hpp"
#include "r2d2surv/metrics.hpp"
#include "r2d2surv/model.hpp"
#include "r2d2surv/rng.hpp"

namespace r2d2surv {

struct SimDesign {
    int p = 100;
    int n_uncensored = 60;
    double rho = 0.5;
    double log_theta_true = 0.5;
    double censor_quantile = 0.65;  // fraction of observations left uncensored
    int replicates = 10;

    /// p = 100 uses 60 uncensored observations, p = 500 uses 100.
    static SimDesign standard(int p, double rho, int replicates = 10);
    /// N = round(n_uncensored / censor_quantile).
    int total_n() const;
    /// Number of observations kept uncensored: round(censor_quantile * N).
    int kept() const;
    /// Short setting label such as "p100_rho0.5".
    std::string label() const;
    void validate() const;
};

/// True coefficients: {0_5, b1, 0_5, b2, 0_...} for p < 500 (p >= 20),
/// and {0_5, b1, 0_5, b2, 0_5, -b1, 0_5, -b2, 0_...} for p >= 500 (p >= 40), with
/// b1 = (2.5, -2, 0.5, -1, 1.5) and b2 = (-1.5, -0.5, 2, -2.5, 1).
Eigen::VectorXd beta_pattern(int p);

/// Rows are independent AR(1) sequences with unit marginal variance.
Eigen::MatrixXd generate_ar1(Eigen::Index n, Eigen::Index p, double rho, Rng& rng);

struct SimDataset {
    SurvivalDataset data;
    Eigen::VectorXd beta_true;
    double beta0_true = 0.0;
    double threshold = 0.0;  // fixed censoring time
};

/// Simulate one replicate: beta0 ~ N(0,1), AR(1) covariates,
/// Y = exp(eta) E^(1/theta) with E ~ Exp(1), and Type-I censoring at the
/// kept()-th smallest time. Covariates are standardized over uncensored rows.
SimDataset generate_dataset(const SimDesign& design, Rng& rng);

enum class MethodKind { r2d2, horseshoe };

struct MethodSpec {
    std::string name;
    MethodKind kind = MethodKind::r2d2;
    R2D2Hyper hyper;
};

/// "horseshoe" / "hs", or "r2d2(a,b)" / "r2d2:a:b" (named "r2d2_a_b"). Throws InvalidParams.
MethodSpec parse_method(const std::string& text);

struct BenchmarkOptions {
    SamplerConfig chain = SamplerConfig::desk();
    int threads = 1;
};

struct ReplicateResult {
    std::string method;
    std::string setting;
    int replicate = 0;
    bool ok = false;
    std::string error;
    SSE sse;
    double auc = 0.0;
    double coverage = 0.0;
    double c_index = 0.0;
    double r2_median = 0.0;
    double acceptance_beta0 = 0.0;
    double acceptance_log_theta = 0.0;
};

struct MetricSummary {
    double mean = 0.0;
    double se = 0.0;  // standard error across replicates
};

struct CellSummary {
    std::string method;
    std::string setting;
    int completed = 0;
    int failed = 0;
    MetricSummary sse_overall;
    MetricSummary sse_nonzero;
    MetricSummary sse_zero;
    MetricSummary auc;
    MetricSummary coverage;
    MetricSummary c_index;
};

struct ExternalRow {
    std::string method;
    std::string setting;
    int replicate = 0;
    std::string metric;
    double value = 0.0;
};

struct BenchmarkResult {
    std::vector<ReplicateResult> replicates;  // design-major, then replicate, then method
    std::vector<CellSummary> cells;
    std::vector<ExternalRow> external;
};

/// Metrics of one fitted chain against the simulation truth.
ReplicateResult evaluate_fit(const PosteriorDraws& draws, const SimDataset& sim);

/// Run every (design, replicate, method) cell. Datasets depend only on
/// (master_seed, design, replicate), so methods see identical data; chains
/// draw from derive_seed(master_seed, {design, replicate, method}). Failures
/// are recorded per cell. Output is identical for any thread count.
BenchmarkResult run_benchmark(const std::vector<SimDesign>& designs, const std::vector<MethodSpec>& methods,
                              const BenchmarkOptions& options, std::uint64_t master_seed);

/// Per-(method, setting) means and standard errors over completed replicates.
std::vector<CellSummary> aggregate(const std::vector<ReplicateResult>& replicates);

/// External comparator rows with columns method, setting, replicate, metric, value.
std::vector<ExternalRow> read_external_results(const TextTable& table);

/// Aggregate table as CSV: method, setting, metric, mean, se, n (external rows included).
std::string benchmark_csv(const BenchmarkResult& result);

/// One row per (method, setting, replicate) with every metric as a column.
std::string replicates_csv(const BenchmarkResult& result);

/// Stable 64-bit hash of a label, used for seed derivation.
std::uint64_t label_hash(const std::string& label);

}  // namespace r2d2surv
