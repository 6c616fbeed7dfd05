#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace r2d2surv {

// Column statistics over uncensored rows plus the standardized matrix.
struct Standardization {
    Eigen::MatrixXd x_std;
    Eigen::VectorXd means;
    Eigen::VectorXd sds;
};

/// Center and scale every column by its mean and sample standard deviation
/// (n-1 denominator) computed over the rows with events[i] == 1.
///
/// Throws TooFewEvents with fewer than two uncensored rows and
/// DegenerateColumn(j) when column j is constant over those rows.
Standardization standardize(const Eigen::MatrixXd& x_raw, const Eigen::VectorXi& events);

/// Right-censored survival data. `events[i] == 1` marks an observed event;
/// a censored record carries its censoring time in `times[i]`.
class SurvivalDataset {
public:
    SurvivalDataset() = default;

    /// Validates the inputs and standardizes covariates over uncensored rows.
    static SurvivalDataset from_raw(Eigen::VectorXd times, Eigen::VectorXi events, Eigen::MatrixXd x_raw,
                                    std::vector<std::string> names = {});

    /// Validates the inputs but keeps covariates on their given scale
    /// (col_means = 0, col_sds = 1). No minimum event count; n may be 0.
    static SurvivalDataset unscaled(Eigen::VectorXd times, Eigen::VectorXi events, Eigen::MatrixXd x,
                                    std::vector<std::string> names = {});

    Eigen::Index n() const noexcept { return times_.size(); }
    Eigen::Index p() const noexcept { return x_std_.cols(); }
    Eigen::Index n_events() const noexcept { return n_events_; }

    const Eigen::VectorXd& times() const noexcept { return times_; }
    const Eigen::VectorXd& log_times() const noexcept { return log_times_; }
    const Eigen::VectorXi& events() const noexcept { return events_; }
    const Eigen::MatrixXd& x_raw() const noexcept { return x_raw_; }
    /// Design matrix used by the likelihood (standardized unless built with unscaled()).
    const Eigen::MatrixXd& x() const noexcept { return x_std_; }
    const Eigen::VectorXd& col_means() const noexcept { return col_means_; }
    const Eigen::VectorXd& col_sds() const noexcept { return col_sds_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    bool standardized() const noexcept { return standardized_; }

    /// Map coefficients on the standardized scale back to the raw covariate
    /// scale. Returns (intercept, slopes).
    std::pair<double, Eigen::VectorXd> to_raw_scale(double beta0, const Eigen::VectorXd& beta) const;

private:
    static void validate(const Eigen::VectorXd& times, const Eigen::VectorXi& events, const Eigen::MatrixXd& x);
    void finish(std::vector<std::string> names);

    Eigen::VectorXd times_;
    Eigen::VectorXd log_times_;
    Eigen::VectorXi events_;
    Eigen::MatrixXd x_raw_;
    Eigen::MatrixXd x_std_;
    Eigen::VectorXd col_means_;
    Eigen::VectorXd col_sds_;
    std::vector<std::string> names_;
    Eigen::Index n_events_ = 0;
    bool standardized_ = false;
};

// Weibull shape theta, intercept and coefficients on the dataset's design matrix.
struct WeibullParams {
    double theta = 1.0;
    double beta0 = 0.0;
    Eigen::VectorXd beta;
};

/// Censored Weibull log-likelihood
///   sum_i d_i (log theta + (theta-1) log y_i - theta eta_i) - y_i^theta exp(-theta eta_i)
/// with eta_i = beta0 + x_i' beta. Throws NonFiniteResult on overflow.
double log_likelihood(const SurvivalDataset& data, const WeibullParams& params);

/// Maximum-likelihood Weibull shape for the intercept-only model. The intercept
/// is profiled out in closed form and log(theta) is searched on [-5, 5] by Brent's method.
double weibull_mle_theta(const SurvivalDataset& data);

/// Intercept of the intercept-only model at a given shape.
double weibull_profile_intercept(const SurvivalDataset& data, double theta);

}  // namespace r2d2surv
