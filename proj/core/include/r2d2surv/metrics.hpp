#pragma once

#include <vector>

#include <Eigen/Core>

#include "r2d2surv/engine.hpp"

namespace r2d2surv {

struct SSE {
    double overall = 0.0;
    double nonzero = 0.0;
    double zero = 0.0;
};

/// Squared estimation error split by whether the true coefficient is zero.
/// Throws LengthMismatch for unequal lengths.
SSE sse_decomposition(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

/// Mann-Whitney AUC of scores against truth (nonzero = 1), ties counted half.
/// Throws OneClassOnly unless both classes are present.
double selection_auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& truth_nonzero);

/// Fraction of coefficients whose equal-tailed 95% interval contains the truth.
double coverage(const PosteriorDraws& draws, const Eigen::VectorXd& beta_true);
double coverage(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const Eigen::VectorXd& beta_true);

/// Harrell's concordance. A pair is comparable when the shorter observed time
/// is an event; it is concordant when that member has the higher risk.
/// Risk ties count one half. Throws NoComparablePairs.
double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& times, const Eigen::VectorXi& events);

struct SelectionScore {
    Eigen::VectorXd score;       // 1 - 2 min(P(beta_j > 0), P(beta_j < 0))
    Eigen::VectorXi significant; // 95% equal-tailed interval excludes 0
};

SelectionScore significance_and_scores(const PosteriorDraws& draws);
SelectionScore significance_and_scores(const Eigen::MatrixXd& coefficient_draws);

}  // namespace r2d2surv
