#include "r2d2surv/mediation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <thread>

#include <Eigen/Eigenvalues>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd z(n, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw DegenerateColumn(static_cast<std::size_t>(j));
        z.col(j) = (x.col(j).array() - mean) / sd;
    }
    return z;
}

double expit_slope(double v) {
    // e^v / (1 + e^v)^2, symmetric in v
    const double e = std::exp(-std::abs(v));
    return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

PCAProjection pca_project(const Eigen::MatrixXd& x, double variance_target) {
    if (!(variance_target > 0.0 && variance_target <= 1.0)) throw InvalidParams("variance_target must be in (0, 1]");
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n < 2 || p < 1) throw DimensionMismatch("PCA needs at least 2 rows and 1 column");

    const Eigen::MatrixXd z = standardize_columns(x);
    const Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.info() != Eigen::Success) throw NoConvergence("eigendecomposition of the correlation matrix failed");

    PCAProjection out;
    // Eigen returns ascending order.
    out.eigenvalues = eig.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    const double total = out.eigenvalues.sum();
    if (out.eigenvalues[p - 1] <= 1e-12 * std::max(1.0, total)) out.warnings.push_back("rank deficient: trailing eigenvalues are not positive");

    double cumulative = 0.0;
    Eigen::Index keep = p;
    for (Eigen::Index k = 0; k < p; ++k) {
        cumulative += out.eigenvalues[k];
        if (cumulative / total >= variance_target - 1e-9) {
            keep = k + 1;
            break;
        }
    }
    out.p_x = keep;
    out.explained_fraction = out.eigenvalues.head(keep).sum() / total;
    out.rotation = vectors.leftCols(keep);
    for (Eigen::Index k = 0; k < keep; ++k) {
        Eigen::Index arg = 0;
        out.rotation.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.rotation(arg, k) < 0.0) out.rotation.col(k) *= -1.0;
    }
    out.scores = z * out.rotation;
    out.x_star = standardize_columns(out.scores);
    return out;
}

MediatorSelection select_mediators(const SurvivalDataset& outcome_on_mediators, SamplerConfig config, Rng& rng) {
    MediatorSelection sel;
    sel.gbp = prepare_r2d2(outcome_on_mediators, config);
    sel.draws = run_r2d2_chain(outcome_on_mediators, config, rng);
    for (Eigen::Index j = 0; j < sel.draws.n_coef; ++j) {
        const ParamSummary& s = sel.draws.coefficient_summary(j);
        if (s.lower > 0.0 || s.upper < 0.0) sel.selected.push_back(j);
    }
    return sel;
}

Eigen::VectorXd indirect_effects(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& beta, const Eigen::VectorXd& xi,
                                 const Eigen::VectorXi& continuous, const Eigen::MatrixXd& x_star,
                                 bool full_predictor) {
    const Eigen::Index px = alpha.rows();
    const Eigen::Index pm = alpha.cols();
    if (beta.size() != pm || xi.size() != pm || continuous.size() != pm)
        throw DimensionMismatch("alpha, beta, xi and c disagree on the number of mediators");
    if (x_star.cols() != px) throw DimensionMismatch("alpha rows must match the columns of X*");
    const Eigen::Index n = x_star.rows();

    Eigen::VectorXd tau = Eigen::VectorXd::Zero(px);
    for (Eigen::Index j = 0; j < pm; ++j) {
        if (continuous[j] != 0) {
            tau += alpha.col(j) * beta[j];
            continue;
        }
        if (n == 0) continue;
        if (full_predictor) {
            const Eigen::VectorXd lin = (x_star * alpha.col(j)).array() + xi[j];
            double w = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) w += expit_slope(lin[i]);
            tau += alpha.col(j) * (beta[j] * w / static_cast<double>(n));
        } else {
            for (Eigen::Index k = 0; k < px; ++k) {
                double w = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) w += expit_slope(xi[j] + alpha(k, j) * x_star(i, k));
                tau[k] += alpha(k, j) * beta[j] * w / static_cast<double>(n);
            }
        }
    }
    return tau;
}

Eigen::VectorXd rotate_to_original(const Eigen::VectorXd& tau, const Eigen::MatrixXd& rotation) {
    if (rotation.cols() != tau.size())
        throw DimensionMismatch("rotation has " + std::to_string(rotation.cols()) + " columns but tau has " +
                                std::to_string(tau.size()) + " entries");
    return rotation * tau;
}

double delta_days(double omega, double mean_age_years) { return std::expm1(omega) * mean_age_years * 365.0; }

MediationResult run_mediation(const MediationInputs& in, const MediationConfig& config, std::uint64_t seed) {
    const Eigen::Index n = in.times.size();
    const Eigen::Index pm = in.mediators.cols();
    if (in.events.size() != n || in.mediators.rows() != n || in.exposures.rows() != n)
        throw LengthMismatch("outcome, mediator and exposure tables must have the same number of rows");
    if (in.mediator_binary.size() != pm) throw DimensionMismatch("mediator type flags do not match the mediators");
    config.outcome.validate();
    config.mediator.validate();

    MediationResult res;
    res.pca = pca_project(in.exposures, config.variance_target);
    for (const auto& w : res.pca.warnings) res.warnings.push_back(w);
    const Eigen::MatrixXd& xs = res.pca.x_star;
    const Eigen::Index px = res.pca.p_x;
    const Eigen::Index p = in.exposures.cols();

    // Outcome design: centered mediators then X*; centering only moves the intercept.
    Eigen::MatrixXd design(n, pm + px);
    for (Eigen::Index j = 0; j < pm; ++j) design.col(j) = in.mediators.col(j).array() - in.mediators.col(j).mean();
    design.rightCols(px) = xs;
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < pm; ++j)
        names.push_back(static_cast<std::size_t>(j) < in.mediator_names.size() ? in.mediator_names[static_cast<std::size_t>(j)]
                                                                               : "m" + std::to_string(j + 1));
    for (Eigen::Index k = 0; k < px; ++k) names.push_back("pc" + std::to_string(k + 1));
    const SurvivalDataset outcome_data = SurvivalDataset::unscaled(in.times, in.events, design, names);

    res.mediator_draws.resize(static_cast<std::size_t>(pm));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pm) + 1);
    auto run_job = [&](Eigen::Index job) {
        try {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(job)}));
            if (job == 0) {
                res.outcome = run_gaussian_weibull_chain(outcome_data, config.outcome, rng);
                return;
            }
            const Eigen::Index j = job - 1;
            const Eigen::VectorXd m = in.mediators.col(j);
            auto& slot = res.mediator_draws[static_cast<std::size_t>(j)];
            slot = in.mediator_binary[j] != 0 ? run_logistic_chain(m, xs, config.mediator, rng)
                                              : run_linear_chain(m, xs, config.mediator, rng);
        } catch (...) {
            errors[static_cast<std::size_t>(job)] = std::current_exception();
        }
    };
    const Eigen::Index jobs = pm + 1;
    const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs)));
    if (threads == 1) {
        for (Eigen::Index job = 0; job < jobs; ++job) run_job(job);
    } else {
        std::atomic<Eigen::Index> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (Eigen::Index job = next++; job < jobs; job = next++) run_job(job);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t j = 0; j < res.mediator_draws.size(); ++j)
        for (const auto& w : res.mediator_draws[j].warnings) res.warnings.push_back(names[j] + ": " + w);

    Eigen::Index draws = res.outcome.draws.rows();
    for (const auto& d : res.mediator_draws) draws = std::min(draws, d.draws.rows());
    if (draws != res.outcome.draws.rows() ||
        std::any_of(res.mediator_draws.begin(), res.mediator_draws.end(),
                    [&](const PosteriorDraws& d) { return d.draws.rows() != draws; }))
        res.warnings.push_back("chains had unequal retained draws; truncated to " + std::to_string(draws));

    Eigen::VectorXi continuous(pm);
    for (Eigen::Index j = 0; j < pm; ++j) continuous[j] = in.mediator_binary[j] != 0 ? 0 : 1;

    res.tau_indirect.resize(draws, px);
    res.tau_direct.resize(draws, px);
    res.indirect.resize(draws, p);
    res.direct.resize(draws, p);
    res.total.resize(draws, p);
    Eigen::MatrixXd alpha(px, pm);
    Eigen::VectorXd beta(pm);
    Eigen::VectorXd xi(pm);
    const Eigen::Index off = res.outcome.coef_offset;
    for (Eigen::Index t = 0; t < draws; ++t) {
        for (Eigen::Index j = 0; j < pm; ++j) {
            const PosteriorDraws& md = res.mediator_draws[static_cast<std::size_t>(j)];
            xi[j] = md.draws(t, 0);
            alpha.col(j) = md.draws.row(t).segment(md.coef_offset, px).transpose();
            beta[j] = res.outcome.draws(t, off + j);
        }
        const Eigen::VectorXd tau_i = indirect_effects(alpha, beta, xi, continuous, xs, config.full_predictor);
        const Eigen::VectorXd tau_d = res.outcome.draws.row(t).segment(off + pm, px).transpose();
        res.tau_indirect.row(t) = tau_i.transpose();
        res.tau_direct.row(t) = tau_d.transpose();
        const Eigen::VectorXd omega = rotate_to_original(tau_i, res.pca.rotation);
        const Eigen::VectorXd direct = rotate_to_original(tau_d, res.pca.rotation);
        res.indirect.row(t) = omega.transpose();
        res.direct.row(t) = direct.transpose();
        res.total.row(t) = (direct + omega).transpose();
    }

    res.has_delta = std::isfinite(in.mean_age_years);
    auto excludes_zero = [](const ParamSummary& s) { return s.lower > 0.0 || s.upper < 0.0; };
    for (Eigen::Index c = 0; c < p; ++c) {
        EffectSummary e;
        e.name = static_cast<std::size_t>(c) < in.exposure_names.size() ? in.exposure_names[static_cast<std::size_t>(c)]
                                                                        : "x" + std::to_string(c + 1);
        e.indirect = summarize(res.indirect.col(c));
        e.direct = summarize(res.direct.col(c));
        e.total = summarize(res.total.col(c));
        e.significant_indirect = excludes_zero(e.indirect);
        e.significant_direct = excludes_zero(e.direct);
        e.significant_total = excludes_zero(e.total);
        e.proportion_mediated = e.total.median != 0.0 ? e.indirect.median / e.total.median : 0.0;
        if (res.has_delta) {
            auto to_days = [&](const Eigen::VectorXd& v) {
                return summarize(v.unaryExpr([&](double w) { return delta_days(w, in.mean_age_years); }));
            };
            e.delta_indirect = to_days(res.indirect.col(c));
            e.delta_direct = to_days(res.direct.col(c));
            e.delta_total = to_days(res.total.col(c));
        }
        res.effects.push_back(e);
    }
    return res;
}

}  // namespace r2d2surv
