#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "r2d2surv/model.hpp"
#include "r2d2surv/prior.hpp"
#include "r2d2surv/rng.hpp"

namespace r2d2surv {

struct AcceptanceBand {
    double lower = 0.30;
    double upper = 0.50;
};

enum class InitMode {
    // Ridge regression of log event times on the uncensored rows gives beta;
    // theta comes from the residual scale, W = |beta|^2 and phi ~ beta^2.
    ridge,
    // beta = 0, log(theta) at the intercept-only MLE, W at the GBP median, phi = 1/p.
    null_model,
};

struct SamplerConfig {
    int iterations = 100000;
    int burn_in = 30000;
    int thin = 3;
    R2D2Hyper hyper;
    GBPParams gbp;
    double t1 = 0.0;         // prior mean of log(theta)
    double t2 = 100.0;       // prior variance of log(theta)
    double mu_b0 = 0.0;      // prior mean of the intercept
    double sig2_b0 = 100.0;  // prior variance of the intercept
    double coef_prior_var = 100.0;  // fixed coefficient variance of the Gaussian prior
    std::uint64_t seed = 1;
    AcceptanceBand target_accept;
    int adapt_window = 100;  // burn-in iterations between step-size adjustments
    InitMode init = InitMode::ridge;
    // Leading fraction of burn-in during which the R2D2 block uses
    // a* -> max(a*, p), so local shares of zeroed coefficients can recover.
    double warmup_fraction = 0.5;

    /// 20k iterations, 6k burn-in, thin 3.
    static SamplerConfig desk();
    /// Uninformative fixed-Gaussian outcome model: N(0,100) coefficients and
    /// intercept, log(theta) ~ N(0,1000), 20k iterations after 5k burn-in.
    static SamplerConfig gaussian_outcome();

    int retained() const { return (iterations - burn_in) / thin; }
    /// Throws InvalidParams when the settings are inconsistent.
    void validate() const;
};

/// Fit the Weibull shape MLE and the GBP approximation at that shape, storing
/// the result in config.gbp.
GBPFit prepare_r2d2(const SurvivalDataset& data, SamplerConfig& config, const GBPFitOptions& options = {});

struct ParamSummary {
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double lower = 0.0;  // 2.5% quantile
    double upper = 0.0;  // 97.5% quantile
};

/// Type-7 (linear interpolation) empirical quantile.
double quantile(std::vector<double> values, double prob);
ParamSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& draws);

// Retained draws, one row per kept iteration and one column per parameter.
struct PosteriorDraws {
    std::string model;
    std::vector<std::string> names;
    Eigen::MatrixXd draws;
    std::vector<ParamSummary> summary;
    std::map<std::string, double> acceptance;  // post-burn-in MH acceptance per block
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;
    int iterations = 0;
    int burn_in = 0;
    int thin = 1;
    Eigen::Index coef_offset = 0;  // first coefficient column
    Eigen::Index n_coef = 0;

    bool has(std::string_view name) const;
    /// Column index; throws InvalidParams for unknown names.
    Eigen::Index index(std::string_view name) const;
    Eigen::VectorXd column(std::string_view name) const { return draws.col(index(name)); }
    auto coefficients() const { return draws.middleCols(coef_offset, n_coef); }
    const ParamSummary& coefficient_summary(Eigen::Index j) const {
        return summary[static_cast<std::size_t>(coef_offset + j)];
    }
    void compute_summary();
};

// ---- Weibull Metropolis-within-Gibbs kernel ---------------------------------------

enum class ShrinkageKind { r2d2, horseshoe, gaussian };

// Every unknown of the sampler at one iteration.
struct ChainState {
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    double log_theta = 0.0;
    double W = 1.0;        // global variance (sum of coefficient variances for horseshoe)
    double gamma = 1.0;    // R2D2 rate; tau^2 for horseshoe
    Eigen::VectorXd phi;   // local variance shares, sums to one
    Eigen::VectorXd log_u; // log of the auxiliary exponential variables
    double beta0_scale = 0.1;
    double log_theta_scale = 0.1;
    long beta0_accepts = 0;
    long log_theta_accepts = 0;
};

/// Bounds on beta_j implied by observation i alone, from
/// u_i > y_i^theta exp(-theta (beta0 + x_i' beta)): x_ij > 0 gives a lower
/// bound, x_ij < 0 an upper bound and x_ij = 0 leaves beta_j free.
std::pair<double, double> beta_truncation_bounds(Eigen::Index i, Eigen::Index j, const ChainState& state,
                                                 const SurvivalDataset& data);
/// Intersection of the per-observation bounds over all i. Throws
/// InfeasibleRegion when it is empty.
std::pair<double, double> beta_bounds(Eigen::Index j, const ChainState& state, const SurvivalDataset& data);

class ShrinkagePrior;

/// One sweep updates, in order: intercept (random-walk MH, auxiliaries
/// integrated out), log(theta) (random-walk MH), the auxiliaries u, each
/// coefficient from its truncated normal full conditional, and the
/// prior-specific variance block. The data may be swapped between sweeps.
class WeibullGibbsKernel {
public:
    WeibullGibbsKernel(const SurvivalDataset& data, const SamplerConfig& config, ShrinkageKind kind);
    ~WeibullGibbsKernel();
    WeibullGibbsKernel(WeibullGibbsKernel&&) noexcept;
    WeibullGibbsKernel& operator=(WeibullGibbsKernel&&) noexcept;

    /// Starting point per config.init; the intercept starts at the mean log
    /// event time. Auxiliaries are drawn so the state is feasible.
    void initialize(Rng& rng);
    /// Start from an explicit state (auxiliaries are redrawn on the next sweep).
    void set_state(const ChainState& state);
    void set_data(const SurvivalDataset& data);
    void sweep(Rng& rng);
    /// Rescale the MH step sizes from the acceptance rates seen since the
    /// last call (x1.1 above the target band, x0.9 below) and reset the window.
    void adapt_scales();
    /// Toggle the relaxed burn-in variant of the prior block (R2D2 only).
    void set_warmup(bool on);

    const ChainState& state() const noexcept { return state_; }
    /// Linear predictor beta0 + X beta for the current state.
    Eigen::VectorXd linear_predictor() const;
    /// Prior-specific scalars exported as columns (names, values).
    std::vector<std::string> extra_names() const;
    std::vector<double> extra_values() const;
    ShrinkageKind kind() const noexcept { return kind_; }

private:
    void update_intercept(Rng& rng);
    void update_shape(Rng& rng);
    void update_auxiliaries(Rng& rng);
    void update_coefficients(Rng& rng);
    void refresh_design_sums();
    void ridge_start();

    const SurvivalDataset* data_;
    SamplerConfig config_;
    ShrinkageKind kind_;
    std::unique_ptr<ShrinkagePrior> prior_;
    ChainState state_;
    Eigen::VectorXd eta_;
    Eigen::VectorXd slack_;          // log u_i - theta (log y_i - eta_i) > 0
    Eigen::VectorXd event_col_sums_; // sum_i d_i X_ij
    Eigen::VectorXd event_weights_;  // d_i as doubles
    double n_events_ = 0.0;
    long window_sweeps_ = 0;
    long window_beta0_ = 0;
    long window_log_theta_ = 0;
};

/// R2D2 sampler; config.gbp must hold the fitted GBP approximation.
PosteriorDraws run_r2d2_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng);
/// Same skeleton with a horseshoe prior (half-Cauchy local and global scales,
/// inverse-gamma auxiliary representation).
PosteriorDraws run_horseshoe_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng);
/// Non-penalized Weibull model with fixed N(0, coef_prior_var) coefficients.
PosteriorDraws run_gaussian_weibull_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng);
PosteriorDraws run_weibull_chain(const SurvivalDataset& data, const SamplerConfig& config, ShrinkageKind kind,
                                 Rng& rng);

/// Bayesian R^2 for every retained draw, from the W and log_theta columns.
Eigen::VectorXd bayes_r2_posterior(const PosteriorDraws& draws);

// ---- mediator models --------------------------------------------------------------

struct MediatorConfig {
    int iterations = 20000;
    int burn_in = 5000;
    int thin = 1;
    double intercept_prior_var = 100.0;
    double ig_shape = 0.1;
    double ig_scale = 0.1;
    std::uint64_t seed = 1;
    AcceptanceBand target_accept;
    int adapt_window = 100;

    int retained() const { return (iterations - burn_in) / thin; }
    void validate() const;
};

/// Logistic regression of a binary mediator on X*: intercept ~ N(0, intercept_prior_var),
/// slopes ~ N(0, sigma^2), sigma^2 ~ InvGamma(0.1, 0.1); coordinate-wise
/// adaptive random-walk MH. Columns: xi, alpha[1..p], sigma2.
PosteriorDraws run_logistic_chain(const Eigen::VectorXd& mediator, const Eigen::MatrixXd& x_star,
                                  const MediatorConfig& config, Rng& rng);

/// Linear regression of a continuous mediator on X*: conjugate Gibbs for the
/// coefficients, tau^2 and sigma^2. Columns: xi, alpha[1..p], sigma2, tau2.
PosteriorDraws run_linear_chain(const Eigen::VectorXd& mediator, const Eigen::MatrixXd& x_star,
                                const MediatorConfig& config, Rng& rng);

}  // namespace r2d2surv
