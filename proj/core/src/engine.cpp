#include "r2d2surv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "r2d2surv/dists.hpp"
#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Smallest variance share / auxiliary value kept positive by the samplers.
constexpr double kFloor = 1e-300;

double clamp_positive(double x) { return std::clamp(x, kFloor, 1.0 / kFloor); }

double log_sum_exp(const Eigen::VectorXd& v) {
    if (v.size() == 0) return -kInf;
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

void check_band(const AcceptanceBand& band) {
    if (!(band.lower > 0.0 && band.lower < band.upper && band.upper < 1.0))
        throw InvalidParams("target acceptance band must satisfy 0 < lower < upper < 1");
}

double adjust_scale(double scale, double rate, const AcceptanceBand& band) {
    if (rate < band.lower) return scale * 0.9;
    if (rate > band.upper) return scale * 1.1;
    return scale;
}

}  // namespace

// ---- configuration -----------------------------------------------------------------

SamplerConfig SamplerConfig::desk() {
    SamplerConfig c;
    c.iterations = 20000;
    c.burn_in = 6000;
    c.thin = 3;
    return c;
}

SamplerConfig SamplerConfig::gaussian_outcome() {
    SamplerConfig c;
    c.iterations = 20000;
    c.burn_in = 5000;
    c.thin = 1;
    c.t1 = 0.0;
    c.t2 = 1000.0;
    c.mu_b0 = 0.0;
    c.sig2_b0 = 100.0;
    c.coef_prior_var = 100.0;
    return c;
}

void SamplerConfig::validate() const {
    if (iterations <= 0) throw InvalidParams("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw InvalidParams("burn_in must lie in [0, iterations)");
    if (thin < 1) throw InvalidParams("thin must be at least 1");
    if (!(t2 > 0.0) || !(sig2_b0 > 0.0) || !(coef_prior_var > 0.0))
        throw InvalidParams("prior variances t2, sig2_b0 and coef_prior_var must be positive");
    if (!(hyper.a > 0.0) || !(hyper.b > 0.0)) throw InvalidParams("R2D2 hyperparameters a, b must be positive");
    if (!(gbp.a_star > 0.0) || !(gbp.b_star > 0.0) || !(gbp.d_star > 0.0) || gbp.c_star != 1.0)
        throw InvalidParams("GBP parameters must be positive with c* = 1");
    if (adapt_window < 1) throw InvalidParams("adapt_window must be at least 1");
    if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) throw InvalidParams("warmup_fraction must be in [0, 1]");
    check_band(target_accept);
}

void MediatorConfig::validate() const {
    if (iterations <= 0) throw InvalidParams("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw InvalidParams("burn_in must lie in [0, iterations)");
    if (thin < 1) throw InvalidParams("thin must be at least 1");
    if (!(intercept_prior_var > 0.0) || !(ig_shape > 0.0) || !(ig_scale > 0.0))
        throw InvalidParams("mediator prior settings must be positive");
    if (adapt_window < 1) throw InvalidParams("adapt_window must be at least 1");
    check_band(target_accept);
}

GBPFit prepare_r2d2(const SurvivalDataset& data, SamplerConfig& config, const GBPFitOptions& options) {
    const double theta = weibull_mle_theta(data);
    GBPFit fit = fit_gbp_approx(theta, config.hyper, options);
    config.gbp = fit.params;
    return fit;
}

// ---- summaries ----------------------------------------------------------------------

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ParamSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& draws) {
    ParamSummary s;
    const auto n = draws.size();
    if (n == 0) {
        s.mean = s.sd = s.median = s.lower = s.upper = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = draws.mean();
    s.sd = n > 1 ? std::sqrt((draws.array() - s.mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
    std::vector<double> v(draws.data(), draws.data() + n);
    std::sort(v.begin(), v.end());
    auto q = [&](double prob) {
        const double h = (static_cast<double>(n) - 1.0) * prob;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.median = q(0.5);
    s.lower = q(0.025);
    s.upper = q(0.975);
    return s;
}

bool PosteriorDraws::has(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::Index PosteriorDraws::index(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidParams("no parameter named '" + std::string(name) + "'");
    return static_cast<Eigen::Index>(it - names.begin());
}

void PosteriorDraws::compute_summary() {
    summary.clear();
    summary.reserve(static_cast<std::size_t>(draws.cols()));
    for (Eigen::Index c = 0; c < draws.cols(); ++c) summary.push_back(summarize(draws.col(c)));
}

// ---- shrinkage priors ------------------------------------------------------------------

// Variance block of the coefficient prior. Every prior keeps
// Var(beta_j) = phi_j * W in the chain state.
class ShrinkagePrior {
public:
    virtual ~ShrinkagePrior() = default;
    virtual void initialize(ChainState& s, Rng& rng) = 0;
    virtual void adopt(const ChainState& s) = 0;
    virtual void update(ChainState& s, Rng& rng) = 0;
    virtual std::vector<std::string> names() const = 0;
    virtual std::vector<double> values(const ChainState& s) const = 0;
    virtual void set_warmup(bool) {}
};

namespace {

class R2D2Prior final : public ShrinkagePrior {
public:
    explicit R2D2Prior(const GBPParams& gbp) : gbp_(gbp) {}

    void initialize(ChainState& s, Rng& rng) override {
        const auto p = s.beta.size();
        s.W = gbp_median(gbp_);
        s.phi = Eigen::VectorXd::Constant(p, p > 0 ? 1.0 / static_cast<double>(p) : 0.0);
        s.gamma = clamp_positive(rng.gamma(gbp_.b_star, gbp_.d_star));
    }

    void adopt(const ChainState&) override {}

    void set_warmup(bool on) override { warmup_ = on; }

    void update(ChainState& s, Rng& rng) override {
        const auto p = s.beta.size();
        const double a_star = warmup_ ? std::max(gbp_.a_star, static_cast<double>(p)) : gbp_.a_star;
        s.gamma = clamp_positive(rng.gamma(a_star + gbp_.b_star, gbp_.d_star + s.W));
        const double psi = 2.0 * s.gamma;
        double chi_w = 0.0;
        if (p > 0) {
            // phi | beta, gamma with W integrated out, then W | beta, phi, gamma.
            const double lambda_t = a_star / static_cast<double>(p) - 0.5;
            Eigen::VectorXd t(p);
            for (Eigen::Index j = 0; j < p; ++j) {
                const double b2 = std::max(s.beta[j] * s.beta[j], kFloor);
                t[j] = clamp_positive(sample_gig({b2, psi, lambda_t}, rng));
            }
            s.phi = t / t.sum();
            for (Eigen::Index j = 0; j < p; ++j) {
                s.phi[j] = std::max(s.phi[j], kFloor);
                chi_w += std::max(s.beta[j] * s.beta[j], kFloor) / s.phi[j];
            }
        }
        const double lambda_w = a_star - 0.5 * static_cast<double>(p);
        s.W = clamp_positive(sample_gig({chi_w, psi, lambda_w}, rng));
    }

    std::vector<std::string> names() const override { return {"W", "gamma"}; }
    std::vector<double> values(const ChainState& s) const override { return {s.W, s.gamma}; }

private:
    GBPParams gbp_;
    bool warmup_ = false;
};

// Half-Cauchy local and global scales through inverse-gamma auxiliaries:
// lambda_j^2 | nu_j ~ IG(1/2, 1/nu_j), nu_j ~ IG(1/2, 1), same for tau^2 with xi.
class HorseshoePrior final : public ShrinkagePrior {
public:
    void initialize(ChainState& s, Rng&) override {
        const auto p = s.beta.size();
        lambda2_ = Eigen::VectorXd::Ones(p);
        nu_ = Eigen::VectorXd::Ones(p);
        tau2_ = 1.0;
        xi_ = 1.0;
        write(s);
    }

    void adopt(const ChainState& s) override {
        const auto p = s.beta.size();
        tau2_ = s.gamma;
        lambda2_ = (s.phi * s.W / tau2_).unaryExpr([](double v) { return clamp_positive(v); });
        nu_ = Eigen::VectorXd::Ones(p);
        xi_ = 1.0;
    }

    void update(ChainState& s, Rng& rng) override {
        const auto p = s.beta.size();
        double ratio_sum = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double b2 = s.beta[j] * s.beta[j];
            lambda2_[j] = clamp_positive(rng.inv_gamma(1.0, 1.0 / nu_[j] + b2 / (2.0 * tau2_)));
            nu_[j] = clamp_positive(rng.inv_gamma(1.0, 1.0 + 1.0 / lambda2_[j]));
            ratio_sum += b2 / lambda2_[j];
        }
        tau2_ = clamp_positive(rng.inv_gamma(0.5 * (static_cast<double>(p) + 1.0), 1.0 / xi_ + 0.5 * ratio_sum));
        xi_ = clamp_positive(rng.inv_gamma(1.0, 1.0 + 1.0 / tau2_));
        write(s);
    }

    std::vector<std::string> names() const override { return {"W", "tau2"}; }
    std::vector<double> values(const ChainState& s) const override { return {s.W, s.gamma}; }

private:
    void write(ChainState& s) const {
        const double total = lambda2_.sum();
        s.gamma = tau2_;
        s.W = clamp_positive(tau2_ * total);
        s.phi = total > 0.0 ? Eigen::VectorXd(lambda2_ / total) : Eigen::VectorXd(lambda2_);
    }

    Eigen::VectorXd lambda2_;
    Eigen::VectorXd nu_;
    double tau2_ = 1.0;
    double xi_ = 1.0;
};

class GaussianPrior final : public ShrinkagePrior {
public:
    explicit GaussianPrior(double variance) : variance_(variance) {}

    void initialize(ChainState& s, Rng&) override { write(s); }
    void adopt(const ChainState&) override {}
    void update(ChainState& s, Rng&) override { write(s); }
    std::vector<std::string> names() const override { return {}; }
    std::vector<double> values(const ChainState&) const override { return {}; }

private:
    void write(ChainState& s) const {
        const auto p = s.beta.size();
        s.phi = Eigen::VectorXd::Constant(p, p > 0 ? 1.0 / static_cast<double>(p) : 0.0);
        s.W = variance_ * static_cast<double>(std::max<Eigen::Index>(p, 1));
        s.gamma = 1.0;
    }

    double variance_;
};

std::unique_ptr<ShrinkagePrior> make_prior(ShrinkageKind kind, const SamplerConfig& config) {
    switch (kind) {
        case ShrinkageKind::r2d2: return std::make_unique<R2D2Prior>(config.gbp);
        case ShrinkageKind::horseshoe: return std::make_unique<HorseshoePrior>();
        case ShrinkageKind::gaussian: return std::make_unique<GaussianPrior>(config.coef_prior_var);
    }
    throw InvalidParams("unknown shrinkage prior");
}

const char* kind_name(ShrinkageKind kind) {
    switch (kind) {
        case ShrinkageKind::r2d2: return "r2d2";
        case ShrinkageKind::horseshoe: return "horseshoe";
        case ShrinkageKind::gaussian: return "gaussian";
    }
    return "unknown";
}

}  // namespace

// ---- truncation bounds -------------------------------------------------------------

std::pair<double, double> beta_truncation_bounds(Eigen::Index i, Eigen::Index j, const ChainState& state,
                                                 const SurvivalDataset& data) {
    const double xij = data.x()(i, j);
    if (xij == 0.0) return {-kInf, kInf};
    const double theta = std::exp(state.log_theta);
    const double eta_without_j = state.beta0 + data.x().row(i).dot(state.beta) - xij * state.beta[j];
    const double bound = (data.log_times()[i] - eta_without_j - state.log_u[i] / theta) / xij;
    if (xij > 0.0) return {bound, kInf};
    return {-kInf, bound};
}

std::pair<double, double> beta_bounds(Eigen::Index j, const ChainState& state, const SurvivalDataset& data) {
    double lower = -kInf;
    double upper = kInf;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto [lo, hi] = beta_truncation_bounds(i, j, state, data);
        lower = std::max(lower, lo);
        upper = std::min(upper, hi);
    }
    if (!(lower < upper)) {
        std::ostringstream msg;
        msg << "empty truncation region for coefficient " << j << ": (" << lower << ", " << upper << ")";
        throw InfeasibleRegion(msg.str());
    }
    return {lower, upper};
}

// ---- Weibull kernel ----------------------------------------------------------------

WeibullGibbsKernel::WeibullGibbsKernel(const SurvivalDataset& data, const SamplerConfig& config,
                                       ShrinkageKind kind)
    : data_(&data), config_(config), kind_(kind), prior_(make_prior(kind, config)) {
    config_.validate();
    state_.beta = Eigen::VectorXd::Zero(data.p());
    refresh_design_sums();
}

WeibullGibbsKernel::~WeibullGibbsKernel() = default;
WeibullGibbsKernel::WeibullGibbsKernel(WeibullGibbsKernel&&) noexcept = default;
WeibullGibbsKernel& WeibullGibbsKernel::operator=(WeibullGibbsKernel&&) noexcept = default;

void WeibullGibbsKernel::refresh_design_sums() {
    const SurvivalDataset& d = *data_;
    event_weights_ = d.events().cast<double>();
    n_events_ = event_weights_.sum();
    event_col_sums_ = d.x().transpose() * event_weights_;
    eta_ = linear_predictor();
    slack_ = Eigen::VectorXd::Constant(d.n(), kInf);
    if (state_.log_u.size() != d.n()) state_.log_u = Eigen::VectorXd::Constant(d.n(), kInf);
}

void WeibullGibbsKernel::set_data(const SurvivalDataset& data) {
    if (data.p() != data_->p()) throw DimensionMismatch("replacement data must keep the number of covariates");
    data_ = &data;
    refresh_design_sums();
}

Eigen::VectorXd WeibullGibbsKernel::linear_predictor() const {
    Eigen::VectorXd eta = data_->x() * state_.beta;
    eta.array() += state_.beta0;
    return eta;
}

void WeibullGibbsKernel::initialize(Rng& rng) {
    const SurvivalDataset& d = *data_;
    const auto p = d.p();
    double log_time_sum = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i)
        if (d.events()[i] == 1) log_time_sum += d.log_times()[i];
    state_.beta0 = n_events_ > 0.0 ? log_time_sum / n_events_ : config_.mu_b0;
    state_.beta = Eigen::VectorXd::Zero(p);
    state_.log_theta = config_.t1;
    if (d.n_events() >= 2) {
        try {
            state_.log_theta = std::log(weibull_mle_theta(d));
        } catch (const NoConvergence&) {
        }
    }
    prior_->initialize(state_, rng);
    if (config_.init == InitMode::ridge && d.n_events() >= 2 && p > 0) ridge_start();

    const double theta = std::exp(state_.log_theta);
    state_.beta0_scale = 2.4 / std::sqrt(n_events_ * theta * theta + 1.0 / config_.sig2_b0);
    state_.log_theta_scale = 2.4 / std::sqrt(2.0 * n_events_ + 1.0 / config_.t2);
    state_.beta0_accepts = 0;
    state_.log_theta_accepts = 0;
    window_sweeps_ = window_beta0_ = window_log_theta_ = 0;
    eta_ = linear_predictor();
    update_auxiliaries(rng);
}

void WeibullGibbsKernel::ridge_start() {
    const SurvivalDataset& d = *data_;
    const Eigen::Index p = d.p();
    const auto m = static_cast<Eigen::Index>(n_events_);
    Eigen::MatrixXd xe(m, p);
    Eigen::VectorXd ye(m);
    for (Eigen::Index i = 0, r = 0; i < d.n(); ++i) {
        if (d.events()[i] != 1) continue;
        xe.row(r) = d.x().row(i);
        ye[r++] = d.log_times()[i];
    }
    const double mean_y = ye.mean();
    ye.array() -= mean_y;
    Eigen::MatrixXd xc = xe.rowwise() - xe.colwise().mean();
    const double penalty = n_events_;
    Eigen::VectorXd beta;
    if (p <= m)
        beta = (xc.transpose() * xc + penalty * Eigen::MatrixXd::Identity(p, p)).ldlt().solve(xc.transpose() * ye);
    else
        beta = xc.transpose() * (xc * xc.transpose() + penalty * Eigen::MatrixXd::Identity(m, m)).ldlt().solve(ye);
    if (!beta.allFinite()) return;

    // residual variance on m - 1 - tr(H) degrees of freedom
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(xc).singularValues();
    const double df = (sv.array().square() / (sv.array().square() + penalty)).sum();
    const Eigen::VectorXd resid = ye - xc * beta;
    const double sd = std::sqrt(resid.squaredNorm() / std::max(static_cast<double>(m) - 1.0 - df, 1.0));
    state_.beta = beta;
    state_.beta0 = mean_y - xe.colwise().mean().dot(beta);
    // Gumbel errors have sd pi / (sqrt(6) theta).
    if (sd > 0.0) state_.log_theta = std::log(std::numbers::pi / (std::sqrt(6.0) * sd));
    if (kind_ != ShrinkageKind::gaussian) {
        const double ss = beta.squaredNorm();
        if (ss > 0.0) {
            state_.W = ss;
            state_.phi = beta.array().square() + 1e-6 * ss / static_cast<double>(p);
            state_.phi /= state_.phi.sum();
        }
        prior_->adopt(state_);
    }
}

void WeibullGibbsKernel::set_state(const ChainState& state) {
    if (state.beta.size() != data_->p() || state.phi.size() != data_->p())
        throw DimensionMismatch("chain state does not match the number of covariates");
    state_ = state;
    if (state_.log_u.size() != data_->n()) state_.log_u = Eigen::VectorXd::Constant(data_->n(), kInf);
    prior_->adopt(state_);
    eta_ = linear_predictor();
    slack_ = Eigen::VectorXd::Constant(data_->n(), kInf);
}

void WeibullGibbsKernel::update_intercept(Rng& rng) {
    const SurvivalDataset& d = *data_;
    const double theta = std::exp(state_.log_theta);
    const double b = state_.beta0;
    // sum_i exp(theta (log y_i - x_i' beta)) on the log scale
    const Eigen::VectorXd z = theta * (d.log_times() - (eta_.array() - b).matrix());
    const double log_s = log_sum_exp(z);
    auto target = [&](double b0) {
        const double dev = b0 - config_.mu_b0;
        return -theta * n_events_ * b0 - std::exp(log_s - theta * b0) - 0.5 * dev * dev / config_.sig2_b0;
    };
    const double proposal = b + state_.beta0_scale * rng.normal();
    const double log_ratio = target(proposal) - target(b);
    if (std::log(rng.uniform()) < log_ratio) {
        eta_.array() += proposal - b;
        state_.beta0 = proposal;
        ++state_.beta0_accepts;
        ++window_beta0_;
    }
}

void WeibullGibbsKernel::update_shape(Rng& rng) {
    const SurvivalDataset& d = *data_;
    const Eigen::VectorXd r = d.log_times() - eta_;
    const double event_r = event_weights_.dot(r);
    auto target = [&](double lt) {
        const double theta = std::exp(lt);
        const double dev = lt - config_.t1;
        double hazard = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i) hazard += std::exp(theta * r[i]);
        return n_events_ * lt + theta * event_r - hazard - 0.5 * dev * dev / config_.t2;
    };
    const double current = state_.log_theta;
    const double proposal = current + state_.log_theta_scale * rng.normal();
    const double log_ratio = target(proposal) - target(current);
    if (std::log(rng.uniform()) < log_ratio) {
        state_.log_theta = proposal;
        ++state_.log_theta_accepts;
        ++window_log_theta_;
    }
}

void WeibullGibbsKernel::update_auxiliaries(Rng& rng) {
    const SurvivalDataset& d = *data_;
    const double theta = std::exp(state_.log_theta);
    slack_.resize(d.n());
    state_.log_u.resize(d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
        // u_i = exp(z_i) + E; the slack log(u_i) - z_i is formed without cancellation.
        const double z = theta * (d.log_times()[i] - eta_[i]);
        const double e = rng.exponential();
        slack_[i] = std::log1p(e * std::exp(-z));
        state_.log_u[i] = z + slack_[i];
    }
}

void WeibullGibbsKernel::update_coefficients(Rng& rng) {
    const SurvivalDataset& d = *data_;
    const double theta = std::exp(state_.log_theta);
    const Eigen::Index n = d.n();
    // R2D2: local variances T_j = phi_j W also move with beta_j integrated out.
    const bool collapsed = kind_ == ShrinkageKind::r2d2 && d.p() > 0;
    Eigen::VectorXd local;
    double xi = 0.0;
    if (collapsed) {
        local = state_.phi * state_.W;
        xi = config_.gbp.a_star / static_cast<double>(d.p());
    }
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        const double old = state_.beta[j];
        const auto col = d.x().col(j);
        double lower = -kInf;
        double upper = kInf;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xij = col[i];
            if (xij > 0.0)
                lower = std::max(lower, old - slack_[i] / (theta * xij));
            else if (xij < 0.0)
                upper = std::min(upper, old - slack_[i] / (theta * xij));
        }
        if (!(lower < upper)) {
            // A region narrower than the rounding error of beta_j pins it in place.
            const double tol = 1e-9 * (1.0 + std::abs(old));
            if (lower - upper > tol || std::isnan(lower) || std::isnan(upper)) {
                std::ostringstream msg;
                msg << "empty truncation region for coefficient " << j << ": (" << lower << ", " << upper
                    << ") at beta_j = " << old;
                throw InfeasibleRegion(msg.str());
            }
            continue;
        }
        if (collapsed) {
            const double c = theta * event_col_sums_[j];
            auto log_mass = [&](double t) {
                const double sd = std::sqrt(t);
                return 0.5 * c * c * t + log_normal_mass((lower + c * t) / sd, (upper + c * t) / sd);
            };
            const double proposal = std::max(rng.gamma(xi, state_.gamma), kFloor);
            if (std::log(rng.uniform()) < log_mass(proposal) - log_mass(std::max(local[j], kFloor)))
                local[j] = proposal;
        }
        const double var = std::max(collapsed ? local[j] : state_.phi[j] * state_.W, kFloor);
        const double mean = -theta * var * event_col_sums_[j];
        const double draw = sample_truncated_normal(mean, std::sqrt(var), lower, upper, rng);
        const double delta = draw - old;
        if (delta != 0.0) {
            eta_ += delta * col;
            slack_ += (theta * delta) * col;
        }
        state_.beta[j] = draw;
    }
    if (collapsed) {
        state_.W = clamp_positive(local.sum());
        state_.phi = (local / state_.W).cwiseMax(kFloor);
        state_.phi /= state_.phi.sum();
    }
}

void WeibullGibbsKernel::sweep(Rng& rng) {
    update_intercept(rng);
    update_shape(rng);
    update_auxiliaries(rng);
    update_coefficients(rng);
    prior_->update(state_, rng);
    ++window_sweeps_;
    // Resynchronize the linear predictor to keep incremental updates from drifting.
    eta_ = linear_predictor();
}

void WeibullGibbsKernel::adapt_scales() {
    if (window_sweeps_ == 0) return;
    const double w = static_cast<double>(window_sweeps_);
    state_.beta0_scale = adjust_scale(state_.beta0_scale, window_beta0_ / w, config_.target_accept);
    state_.log_theta_scale = adjust_scale(state_.log_theta_scale, window_log_theta_ / w, config_.target_accept);
    window_sweeps_ = window_beta0_ = window_log_theta_ = 0;
}

void WeibullGibbsKernel::set_warmup(bool on) { prior_->set_warmup(on); }

std::vector<std::string> WeibullGibbsKernel::extra_names() const { return prior_->names(); }
std::vector<double> WeibullGibbsKernel::extra_values() const { return prior_->values(state_); }

// ---- Weibull chains -------------------------------------------------------------------

namespace {

void check_state(const ChainState& s, int iteration) {
    if (std::isfinite(s.beta0) && std::isfinite(s.log_theta) && std::isfinite(s.W) && std::isfinite(s.gamma) &&
        s.beta.allFinite() && s.W > 0.0 && s.gamma > 0.0)
        return;
    std::ostringstream msg;
    msg << "chain diverged at iteration " << iteration << ": beta0=" << s.beta0 << " log_theta=" << s.log_theta
        << " W=" << s.W << " gamma=" << s.gamma << " max|beta|=" << (s.beta.size() ? s.beta.cwiseAbs().maxCoeff() : 0.0);
    throw ChainDiverged(msg.str());
}

}  // namespace

PosteriorDraws run_weibull_chain(const SurvivalDataset& data, const SamplerConfig& config, ShrinkageKind kind,
                                 Rng& rng) {
    config.validate();
    WeibullGibbsKernel kernel(data, config, kind);
    kernel.initialize(rng);

    PosteriorDraws out;
    out.model = kind_name(kind);
    out.seed = rng.seed();
    out.iterations = config.iterations;
    out.burn_in = config.burn_in;
    out.thin = config.thin;
    out.names = {"beta0", "log_theta"};
    for (auto& name : kernel.extra_names()) out.names.push_back(name);
    out.coef_offset = static_cast<Eigen::Index>(out.names.size());
    out.n_coef = data.p();
    for (const auto& name : data.names()) out.names.push_back("beta[" + name + "]");

    const Eigen::Index cols = static_cast<Eigen::Index>(out.names.size());
    out.draws.resize(config.retained(), cols);

    long b0_at_burn = 0;
    long lt_at_burn = 0;
    Eigen::Index row = 0;
    const int warmup = static_cast<int>(config.warmup_fraction * config.burn_in);
    kernel.set_warmup(warmup > 0);
    for (int t = 0; t < config.iterations; ++t) {
        if (t == warmup) kernel.set_warmup(false);
        if (t == config.burn_in) {
            b0_at_burn = kernel.state().beta0_accepts;
            lt_at_burn = kernel.state().log_theta_accepts;
        }
        kernel.sweep(rng);
        const ChainState& s = kernel.state();
        check_state(s, t);
        if (t < config.burn_in) {
            if ((t + 1) % config.adapt_window == 0) kernel.adapt_scales();
            continue;
        }
        if ((t - config.burn_in + 1) % config.thin != 0) continue;
        auto r = out.draws.row(row++);
        r[0] = s.beta0;
        r[1] = s.log_theta;
        const auto extra = kernel.extra_values();
        for (std::size_t k = 0; k < extra.size(); ++k) r[2 + static_cast<Eigen::Index>(k)] = extra[k];
        r.segment(out.coef_offset, out.n_coef) = s.beta.transpose();
    }
    const double kept = static_cast<double>(config.iterations - config.burn_in);
    out.acceptance["beta0"] = (kernel.state().beta0_accepts - b0_at_burn) / kept;
    out.acceptance["log_theta"] = (kernel.state().log_theta_accepts - lt_at_burn) / kept;
    out.compute_summary();
    return out;
}

PosteriorDraws run_r2d2_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng) {
    return run_weibull_chain(data, config, ShrinkageKind::r2d2, rng);
}

PosteriorDraws run_horseshoe_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng) {
    return run_weibull_chain(data, config, ShrinkageKind::horseshoe, rng);
}

PosteriorDraws run_gaussian_weibull_chain(const SurvivalDataset& data, const SamplerConfig& config, Rng& rng) {
    return run_weibull_chain(data, config, ShrinkageKind::gaussian, rng);
}

Eigen::VectorXd bayes_r2_posterior(const PosteriorDraws& draws) {
    const auto w = draws.draws.col(draws.index("W"));
    const auto lt = draws.draws.col(draws.index("log_theta"));
    Eigen::VectorXd r2(draws.draws.rows());
    for (Eigen::Index t = 0; t < r2.size(); ++t) r2[t] = r2_from_w(w[t], std::exp(lt[t]));
    return r2;
}

// ---- mediator models ----------------------------------------------------------------

namespace {

void check_mediator_inputs(const Eigen::VectorXd& m, const Eigen::MatrixXd& x) {
    if (m.size() != x.rows())
        throw LengthMismatch("mediator has " + std::to_string(m.size()) + " values but X* has " +
                             std::to_string(x.rows()) + " rows");
    if (!m.allFinite() || !x.allFinite()) throw DataError("mediator model inputs must be finite");
}

PosteriorDraws mediator_frame(const char* model, Eigen::Index p, const MediatorConfig& config, Rng& rng,
                              bool with_tau) {
    PosteriorDraws out;
    out.model = model;
    out.seed = rng.seed();
    out.iterations = config.iterations;
    out.burn_in = config.burn_in;
    out.thin = config.thin;
    out.names.push_back("xi");
    out.coef_offset = 1;
    out.n_coef = p;
    for (Eigen::Index k = 0; k < p; ++k) out.names.push_back("alpha[" + std::to_string(k + 1) + "]");
    out.names.push_back("sigma2");
    if (with_tau) out.names.push_back("tau2");
    out.draws.resize(config.retained(), static_cast<Eigen::Index>(out.names.size()));
    return out;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double bernoulli_loglik(const Eigen::VectorXd& m, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) ll += m[i] * eta[i] - softplus(eta[i]);
    return ll;
}

}  // namespace

PosteriorDraws run_logistic_chain(const Eigen::VectorXd& mediator, const Eigen::MatrixXd& x_star,
                                  const MediatorConfig& config, Rng& rng) {
    config.validate();
    check_mediator_inputs(mediator, x_star);
    for (Eigen::Index i = 0; i < mediator.size(); ++i)
        if (mediator[i] != 0.0 && mediator[i] != 1.0) throw DataError("binary mediator must be coded 0/1");

    const Eigen::Index n = x_star.rows();
    const Eigen::Index p = x_star.cols();
    PosteriorDraws out = mediator_frame("logistic", p, config, rng, false);

    // Coordinate 0 is the intercept, 1..p the slopes.
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p + 1);
    const double mean_m = n > 0 ? mediator.mean() : 0.5;
    const double clipped = std::clamp(mean_m, 0.01, 0.99);
    coef[0] = std::log(clipped / (1.0 - clipped));
    double sigma2 = 1.0;
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(p + 1, 2.4 * 2.0 / std::sqrt(static_cast<double>(n) + 1.0));
    Eigen::VectorXd accepts = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd window = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, coef[0]);
    double loglik = bernoulli_loglik(mediator, eta);

    Eigen::Index row = 0;
    Eigen::VectorXd proposal_eta(n);
    for (int t = 0; t < config.iterations; ++t) {
        for (Eigen::Index k = 0; k <= p; ++k) {
            const double old = coef[k];
            const double step = scale[k] * rng.normal();
            const double prior_var = k == 0 ? config.intercept_prior_var : sigma2;
            if (k == 0)
                proposal_eta = eta.array() + step;
            else
                proposal_eta = eta + step * x_star.col(k - 1);
            const double ll = bernoulli_loglik(mediator, proposal_eta);
            const double candidate = old + step;
            const double log_ratio = ll - loglik - 0.5 * (candidate * candidate - old * old) / prior_var;
            if (std::log(rng.uniform()) < log_ratio) {
                coef[k] = candidate;
                eta.swap(proposal_eta);
                loglik = ll;
                window[k] += 1.0;
                if (t >= config.burn_in) accepts[k] += 1.0;
            }
        }
        const double ss = coef.tail(p).squaredNorm();
        sigma2 = clamp_positive(rng.inv_gamma(config.ig_shape + 0.5 * static_cast<double>(p), config.ig_scale + 0.5 * ss));

        if (!coef.allFinite()) throw ChainDiverged("logistic mediator chain diverged at iteration " + std::to_string(t));
        if (t < config.burn_in) {
            if ((t + 1) % config.adapt_window == 0) {
                for (Eigen::Index k = 0; k <= p; ++k)
                    scale[k] = adjust_scale(scale[k], window[k] / config.adapt_window, config.target_accept);
                window.setZero();
            }
            continue;
        }
        if ((t - config.burn_in + 1) % config.thin != 0) continue;
        auto r = out.draws.row(row++);
        r.head(p + 1) = coef.transpose();
        r[p + 1] = sigma2;
    }

    const double kept = static_cast<double>(config.iterations - config.burn_in);
    out.acceptance["xi"] = accepts[0] / kept;
    for (Eigen::Index k = 0; k < p; ++k) out.acceptance["alpha[" + std::to_string(k + 1) + "]"] = accepts[k + 1] / kept;
    bool constant = n > 0 && (mediator.array() == mediator[0]).all();
    double worst = accepts.size() ? accepts.minCoeff() / kept : 1.0;
    if (constant || worst < 0.05) {
        std::ostringstream msg;
        msg << "separation: ";
        if (constant)
            msg << "mediator is constant";
        else
            msg << "MH acceptance collapsed to " << worst;
        out.warnings.push_back(msg.str());
    }
    out.compute_summary();
    return out;
}

PosteriorDraws run_linear_chain(const Eigen::VectorXd& mediator, const Eigen::MatrixXd& x_star,
                                const MediatorConfig& config, Rng& rng) {
    config.validate();
    check_mediator_inputs(mediator, x_star);
    const Eigen::Index n = x_star.rows();
    const Eigen::Index p = x_star.cols();
    PosteriorDraws out = mediator_frame("linear", p, config, rng, true);

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x_star;
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd cross = design.transpose() * mediator;

    double sigma2 = 1.0;
    double tau2 = 1.0;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd z(p + 1);
    Eigen::Index row = 0;
    for (int t = 0; t < config.iterations; ++t) {
        Eigen::MatrixXd precision = gram / sigma2;
        precision(0, 0) += 1.0 / config.intercept_prior_var;
        for (Eigen::Index k = 1; k <= p; ++k) precision(k, k) += 1.0 / tau2;
        Eigen::LLT<Eigen::MatrixXd> llt(precision);
        if (llt.info() != Eigen::Success) throw ChainDiverged("linear mediator precision lost positive definiteness");
        const Eigen::VectorXd mean = llt.solve(cross / sigma2);
        for (Eigen::Index k = 0; k <= p; ++k) z[k] = rng.normal();
        // precision = L L', so L' x = z gives x ~ N(0, precision^-1)
        coef = mean + llt.matrixU().solve(z);

        const double rss = (mediator - design * coef).squaredNorm();
        sigma2 = clamp_positive(rng.inv_gamma(config.ig_shape + 0.5 * static_cast<double>(n), config.ig_scale + 0.5 * rss));
        const double ss = coef.tail(p).squaredNorm();
        tau2 = clamp_positive(rng.inv_gamma(config.ig_shape + 0.5 * static_cast<double>(p), config.ig_scale + 0.5 * ss));

        if (t < config.burn_in || (t - config.burn_in + 1) % config.thin != 0) continue;
        auto r = out.draws.row(row++);
        r.head(p + 1) = coef.transpose();
        r[p + 1] = sigma2;
        r[p + 2] = tau2;
    }
    out.compute_summary();
    return out;
}

}  // namespace r2d2surv
