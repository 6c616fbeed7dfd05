#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "r2d2surv/engine.hpp"
#include "r2d2surv/model.hpp"
#include "r2d2surv/prior.hpp"
#include "r2d2surv/rng.hpp"

namespace r2d2surv {

struct PCAProjection {
    Eigen::MatrixXd rotation;     // p x p_x, orthonormal columns, descending eigenvalue
    Eigen::VectorXd eigenvalues;  // all p eigenvalues of the correlation matrix, descending
    double explained_fraction = 0.0;
    Eigen::Index p_x = 0;
    Eigen::MatrixXd scores;       // standardized X times rotation
    Eigen::MatrixXd x_star;       // scores with every column standardized
    std::vector<std::string> warnings;
};

/// Principal components of the sample correlation matrix of x. Keeps the
/// smallest number of components whose eigenvalues reach variance_target of
/// the total. Each eigenvector is signed so its largest-magnitude entry is
/// positive. Adds a "rank deficient" warning when trailing eigenvalues are <= 0.
PCAProjection pca_project(const Eigen::MatrixXd& x, double variance_target = 0.70);

struct MediatorSelection {
    std::vector<Eigen::Index> selected;
    PosteriorDraws draws;
    GBPFit gbp;
};

/// R2D2 regression of the outcome on candidate mediators; a mediator is
/// selected when its 95% interval excludes zero.
MediatorSelection select_mediators(const SurvivalDataset& outcome_on_mediators, SamplerConfig config, Rng& rng);

/// Indirect effect of every projection:
///   tau_k = sum_j alpha_kj beta_j [c_j + (1 - c_j) mean_i expit'(xi_j + alpha_kj x*_ki)]
/// where c_j = 1 marks a continuous mediator. With full_predictor the
/// derivative is evaluated at xi_j + sum_k alpha_kj x*_ki instead.
Eigen::VectorXd indirect_effects(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& beta, const Eigen::VectorXd& xi,
                                 const Eigen::VectorXi& continuous, const Eigen::MatrixXd& x_star,
                                 bool full_predictor = false);

/// omega = rotation * tau. Throws DimensionMismatch.
Eigen::VectorXd rotate_to_original(const Eigen::VectorXd& tau, const Eigen::MatrixXd& rotation);

/// Difference in days: (exp(omega) - 1) * mean_age_years * 365.
double delta_days(double omega, double mean_age_years);

struct MediationInputs {
    Eigen::VectorXd times;
    Eigen::VectorXi events;
    Eigen::MatrixXd mediators;               // n x p_M, raw scale
    std::vector<std::string> mediator_names;
    Eigen::VectorXi mediator_binary;         // 1 = binary (logistic), 0 = continuous (linear)
    Eigen::MatrixXd exposures;               // n x p
    std::vector<std::string> exposure_names;
    double mean_age_years = std::numeric_limits<double>::quiet_NaN();
};

struct MediationConfig {
    double variance_target = 0.70;
    SamplerConfig outcome = SamplerConfig::gaussian_outcome();
    MediatorConfig mediator;
    bool full_predictor = false;
    int threads = 1;
};

struct EffectSummary {
    std::string name;
    ParamSummary indirect;
    ParamSummary direct;
    ParamSummary total;
    bool significant_indirect = false;
    bool significant_direct = false;
    bool significant_total = false;
    double proportion_mediated = 0.0;  // median indirect / median total
    // Filled when mean_age_years is finite.
    ParamSummary delta_indirect;
    ParamSummary delta_direct;
    ParamSummary delta_total;
};

struct MediationResult {
    PCAProjection pca;
    PosteriorDraws outcome;
    std::vector<PosteriorDraws> mediator_draws;
    Eigen::MatrixXd tau_indirect;  // draws x p_x
    Eigen::MatrixXd tau_direct;    // draws x p_x
    Eigen::MatrixXd indirect;      // draws x p (omega)
    Eigen::MatrixXd direct;        // draws x p
    Eigen::MatrixXd total;         // draws x p
    std::vector<EffectSummary> effects;
    bool has_delta = false;
    std::vector<std::string> warnings;
};

/// Two-stage mediation analysis: PCA of the exposures, a fixed-Gaussian
/// Weibull outcome model on (centered mediators, X*), one logistic or linear
/// model per mediator, and draw-by-draw effect assembly. Chains with unequal
/// retained counts are truncated to the shortest. Deterministic given seed
/// and independent of the thread count.
MediationResult run_mediation(const MediationInputs& inputs, const MediationConfig& config, std::uint64_t seed);

}  // namespace r2d2surv
