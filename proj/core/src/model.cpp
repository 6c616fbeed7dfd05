#include "r2d2surv/model.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

Standardization standardize(const Eigen::MatrixXd& x_raw, const Eigen::VectorXi& events) {
    if (events.size() != x_raw.rows())
        throw LengthMismatch("events length does not match covariate rows");
    const Eigen::Index n_events = (events.array() == 1).count();
    if (n_events < 2) throw TooFewEvents(static_cast<std::size_t>(n_events));

    const Eigen::Index p = x_raw.cols();
    Standardization out;
    out.means.resize(p);
    out.sds.resize(p);
    out.x_std.resize(x_raw.rows(), p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < x_raw.rows(); ++i)
            if (events[i] == 1) sum += x_raw(i, j);
        const double mean = sum / static_cast<double>(n_events);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < x_raw.rows(); ++i)
            if (events[i] == 1) ss += (x_raw(i, j) - mean) * (x_raw(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n_events - 1));
        if (!(sd > 0.0) || !std::isfinite(sd)) throw DegenerateColumn(static_cast<std::size_t>(j));
        out.means[j] = mean;
        out.sds[j] = sd;
        out.x_std.col(j) = (x_raw.col(j).array() - mean) / sd;
    }
    return out;
}

void SurvivalDataset::validate(const Eigen::VectorXd& times, const Eigen::VectorXi& events, const Eigen::MatrixXd& x) {
    if (events.size() != times.size()) throw LengthMismatch("times and events differ in length");
    if (x.rows() != times.size()) throw LengthMismatch("covariate rows differ from number of times");
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || !std::isfinite(times[i]))
            throw DataError("time at row " + std::to_string(i) + " is not a positive finite number");
        if (events[i] != 0 && events[i] != 1)
            throw DataError("event indicator at row " + std::to_string(i) + " is not 0 or 1");
    }
    if (!x.allFinite()) throw DataError("covariates contain non-finite values");
}

void SurvivalDataset::finish(std::vector<std::string> names) {
    log_times_ = times_.array().log();
    n_events_ = (events_.array() == 1).count();
    if (names.empty()) {
        names.reserve(static_cast<std::size_t>(p()));
        for (Eigen::Index j = 0; j < p(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(names.size()) != p())
        throw LengthMismatch("covariate names do not match column count");
    names_ = std::move(names);
}

SurvivalDataset SurvivalDataset::from_raw(Eigen::VectorXd times, Eigen::VectorXi events, Eigen::MatrixXd x_raw,
                                          std::vector<std::string> names) {
    validate(times, events, x_raw);
    SurvivalDataset d;
    auto s = standardize(x_raw, events);
    d.times_ = std::move(times);
    d.events_ = std::move(events);
    d.x_raw_ = std::move(x_raw);
    d.x_std_ = std::move(s.x_std);
    d.col_means_ = std::move(s.means);
    d.col_sds_ = std::move(s.sds);
    d.standardized_ = true;
    d.finish(std::move(names));
    return d;
}

SurvivalDataset SurvivalDataset::unscaled(Eigen::VectorXd times, Eigen::VectorXi events, Eigen::MatrixXd x,
                                          std::vector<std::string> names) {
    validate(times, events, x);
    SurvivalDataset d;
    d.times_ = std::move(times);
    d.events_ = std::move(events);
    d.col_means_ = Eigen::VectorXd::Zero(x.cols());
    d.col_sds_ = Eigen::VectorXd::Ones(x.cols());
    d.x_raw_ = x;
    d.x_std_ = std::move(x);
    d.standardized_ = false;
    d.finish(std::move(names));
    return d;
}

std::pair<double, Eigen::VectorXd> SurvivalDataset::to_raw_scale(double beta0, const Eigen::VectorXd& beta) const {
    if (beta.size() != p()) throw DimensionMismatch("coefficient vector does not match covariate count");
    Eigen::VectorXd slopes = beta.array() / col_sds_.array();
    return {beta0 - slopes.dot(col_means_), std::move(slopes)};
}

double log_likelihood(const SurvivalDataset& data, const WeibullParams& params) {
    if (!(params.theta > 0.0) || !std::isfinite(params.theta)) throw InvalidParams("Weibull shape must be positive");
    if (params.beta.size() != data.p()) throw DimensionMismatch("coefficient vector does not match covariate count");
    const double theta = params.theta;
    const double log_theta = std::log(theta);
    const auto& ly = data.log_times();
    const auto& ev = data.events();
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double eta = params.beta0 + (data.p() ? data.x().row(i).dot(params.beta) : 0.0);
        const double z = theta * (ly[i] - eta);
        if (ev[i] == 1) total += log_theta - ly[i] + z;
        total -= std::exp(z);
    }
    if (!std::isfinite(total)) throw NonFiniteResult("Weibull log-likelihood overflowed");
    return total;
}

namespace {

// log sum_i y_i^theta, computed stably.
double log_sum_pow(const Eigen::VectorXd& log_times, double theta) {
    const double m = theta * log_times.maxCoeff();
    return m + std::log((theta * log_times.array() - m).exp().sum());
}

}  // namespace

double weibull_profile_intercept(const SurvivalDataset& data, double theta) {
    if (data.n_events() < 1) throw TooFewEvents(0);
    return (log_sum_pow(data.log_times(), theta) - std::log(static_cast<double>(data.n_events()))) / theta;
}

double weibull_mle_theta(const SurvivalDataset& data) {
    if (data.n_events() < 1) throw TooFewEvents(0);
    const double n_ev = static_cast<double>(data.n_events());
    double sum_log_event_times = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
        if (data.events()[i] == 1) sum_log_event_times += data.log_times()[i];

    // Negative profile log-likelihood in log(theta).
    auto objective = [&](double log_theta) {
        const double theta = std::exp(log_theta);
        const double ll = n_ev * log_theta + (theta - 1.0) * sum_log_event_times -
                          n_ev * (log_sum_pow(data.log_times(), theta) - std::log(n_ev)) - n_ev;
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
    };

    std::uintmax_t max_iter = 500;
    const auto [arg, value] = boost::math::tools::brent_find_minima(objective, -5.0, 5.0, 52, max_iter);
    if (max_iter >= 500 || !std::isfinite(value)) throw NoConvergence("Weibull shape MLE did not converge");
    return std::exp(arg);
}

}  // namespace r2d2surv
