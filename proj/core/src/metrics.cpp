#include "r2d2surv/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

SSE sse_decomposition(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
    if (beta_hat.size() != beta_true.size())
        throw LengthMismatch("estimate has " + std::to_string(beta_hat.size()) + " coefficients, truth has " +
                             std::to_string(beta_true.size()));
    SSE s;
    for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
        const double d = beta_hat[j] - beta_true[j];
        if (beta_true[j] != 0.0)
            s.nonzero += d * d;
        else
            s.zero += d * d;
    }
    s.overall = s.nonzero + s.zero;
    return s;
}

double selection_auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& truth_nonzero) {
    if (scores.size() != truth_nonzero.size()) throw LengthMismatch("scores and truth differ in length");
    const Eigen::Index n = scores.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });

    // Midranks handle ties.
    double rank_sum = 0.0;
    double positives = 0.0;
    for (Eigen::Index start = 0; start < n;) {
        Eigen::Index end = start;
        while (end + 1 < n && scores[order[end + 1]] == scores[order[start]]) ++end;
        const double midrank = 0.5 * static_cast<double>(start + end) + 1.0;
        for (Eigen::Index k = start; k <= end; ++k) {
            if (truth_nonzero[order[k]] != 0) {
                rank_sum += midrank;
                positives += 1.0;
            }
        }
        start = end + 1;
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) throw OneClassOnly();
    return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double coverage(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, const Eigen::VectorXd& beta_true) {
    if (lower.size() != beta_true.size() || upper.size() != beta_true.size())
        throw LengthMismatch("interval bounds and truth differ in length");
    if (beta_true.size() == 0) return 1.0;
    Eigen::Index hits = 0;
    for (Eigen::Index j = 0; j < beta_true.size(); ++j)
        if (lower[j] <= beta_true[j] && beta_true[j] <= upper[j]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(beta_true.size());
}

double coverage(const PosteriorDraws& draws, const Eigen::VectorXd& beta_true) {
    Eigen::VectorXd lower(draws.n_coef);
    Eigen::VectorXd upper(draws.n_coef);
    for (Eigen::Index j = 0; j < draws.n_coef; ++j) {
        lower[j] = draws.coefficient_summary(j).lower;
        upper[j] = draws.coefficient_summary(j).upper;
    }
    return coverage(lower, upper, beta_true);
}

double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& times, const Eigen::VectorXi& events) {
    if (risk.size() != times.size() || risk.size() != events.size())
        throw LengthMismatch("risk, times and events differ in length");
    double concordant = 0.0;
    double comparable = 0.0;
    const Eigen::Index n = risk.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (events[i] != 1) continue;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == i || !(times[i] < times[k])) continue;
            comparable += 1.0;
            if (risk[i] > risk[k])
                concordant += 1.0;
            else if (risk[i] == risk[k])
                concordant += 0.5;
        }
    }
    if (comparable == 0.0) throw NoComparablePairs();
    return concordant / comparable;
}

SelectionScore significance_and_scores(const Eigen::MatrixXd& coefficient_draws) {
    const Eigen::Index p = coefficient_draws.cols();
    const double m = static_cast<double>(coefficient_draws.rows());
    SelectionScore out;
    out.score.resize(p);
    out.significant.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = coefficient_draws.col(j);
        const double pos = (col.array() > 0.0).count() / m;
        const double neg = (col.array() < 0.0).count() / m;
        out.score[j] = std::clamp(1.0 - 2.0 * std::min(pos, neg), 0.0, 1.0);
        const ParamSummary s = summarize(col);
        out.significant[j] = (s.lower > 0.0 || s.upper < 0.0) ? 1 : 0;
    }
    return out;
}

SelectionScore significance_and_scores(const PosteriorDraws& draws) {
    return significance_and_scores(Eigen::MatrixXd(draws.coefficients()));
}

}  // namespace r2d2surv
