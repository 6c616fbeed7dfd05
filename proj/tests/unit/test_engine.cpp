#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include "r2d2surv/engine.hpp"
#include "r2d2surv/errors.hpp"
#include "r2d2surv/model.hpp"

using namespace r2d2surv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd normal_matrix(Eigen::Index n, Eigen::Index p, Rng& rng) {
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    return x;
}

// Weibull times with S(y) = exp(-y^theta e^(-theta eta)), Type-I censored so
// that a fraction `kept` of rows are events.
SurvivalDataset weibull_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double beta0, double theta,
                             double kept, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
        y[i] = std::exp(beta0 + x.row(i).dot(beta)) * std::pow(rng.exponential(), 1.0 / theta);
    Eigen::VectorXi d = Eigen::VectorXi::Ones(n);
    if (kept < 1.0) {
        std::vector<double> sorted(y.data(), y.data() + n);
        std::sort(sorted.begin(), sorted.end());
        const double cut = sorted[static_cast<std::size_t>(std::lround(kept * n)) - 1];
        for (Eigen::Index i = 0; i < n; ++i)
            if (y[i] > cut) {
                y[i] = cut;
                d[i] = 0;
            }
    }
    return SurvivalDataset::from_raw(y, d, x);
}

SamplerConfig small_config(int iterations, int burn_in, int thin, std::uint64_t seed) {
    SamplerConfig c;
    c.iterations = iterations;
    c.burn_in = burn_in;
    c.thin = thin;
    c.seed = seed;
    return c;
}

// Batch-means standard error of the mean of an autocorrelated series.
double batch_se(const std::vector<double>& x, int batches = 50) {
    const std::size_t len = x.size() / batches;
    std::vector<double> means(batches);
    for (int b = 0; b < batches; ++b)
        means[b] = std::accumulate(x.begin() + b * len, x.begin() + (b + 1) * len, 0.0) / len;
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
    double v = 0.0;
    for (double e : means) v += (e - m) * (e - m);
    return std::sqrt(v / (batches - 1) / batches);
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("single observation truncation bounds") {
    Eigen::MatrixXd x(1, 2);
    x << 1.0, 0.0;
    auto data = SurvivalDataset::unscaled(Eigen::VectorXd::Ones(1), Eigen::VectorXi::Ones(1), x);
    ChainState s;
    s.beta = Eigen::VectorXd::Zero(2);
    s.phi = Eigen::VectorXd::Constant(2, 0.5);
    s.log_u = Eigen::VectorXd::Constant(1, 1.0);
    s.log_theta = 0.0;
    auto [lo, hi] = beta_truncation_bounds(0, 0, s, data);
    CHECK(lo == doctest::Approx(-1.0));
    CHECK(hi == kInf);
    auto [lo0, hi0] = beta_truncation_bounds(0, 1, s, data);
    CHECK(lo0 == -kInf);
    CHECK(hi0 == kInf);

    x(0, 0) = -1.0;
    auto flipped = SurvivalDataset::unscaled(Eigen::VectorXd::Ones(1), Eigen::VectorXi::Ones(1), x);
    auto [lo2, hi2] = beta_truncation_bounds(0, 0, s, flipped);
    CHECK(lo2 == -kInf);
    CHECK(hi2 == doctest::Approx(1.0));
}

TEST_CASE("bounds are exactly the feasible set of the auxiliary") {
    Rng rng(21);
    const Eigen::Index n = 30, p = 4;
    Eigen::MatrixXd x = normal_matrix(n, p, rng);
    x(3, 2) = 0.0;
    Eigen::VectorXd y(n);
    for (auto& v : y) v = std::exp(rng.normal());
    auto data = SurvivalDataset::unscaled(y, Eigen::VectorXi::Ones(n), x);
    ChainState s;
    s.beta = Eigen::VectorXd::Zero(p);
    for (auto& b : s.beta) b = 0.3 * rng.normal();
    s.beta0 = 0.2;
    s.log_theta = 0.4;
    s.phi = Eigen::VectorXd::Constant(p, 0.25);
    const double theta = std::exp(s.log_theta);
    s.log_u.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = s.beta0 + x.row(i).dot(s.beta);
        s.log_u[i] = std::log(std::exp(theta * (std::log(y[i]) - eta)) + rng.exponential());
    }
    auto feasible = [&](const ChainState& st) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(st.log_u[i] > theta * (std::log(y[i]) - st.beta0 - x.row(i).dot(st.beta)))) return false;
        return true;
    };
    REQUIRE(feasible(s));
    for (Eigen::Index j = 0; j < p; ++j) {
        auto [lo, hi] = beta_bounds(j, s, data);
        CHECK(lo < s.beta[j]);
        CHECK(s.beta[j] < hi);
        for (double edge : {lo, hi}) {
            if (!std::isfinite(edge)) continue;
            ChainState inside = s, outside = s;
            const double dir = edge == lo ? 1.0 : -1.0;
            inside.beta[j] = edge + dir * 1e-7;
            outside.beta[j] = edge - dir * 1e-7;
            CHECK(feasible(inside));
            CHECK_FALSE(feasible(outside));
        }
    }
    s.log_u[0] = -50.0;
    bool infeasible = false;
    for (Eigen::Index j = 0; j < p; ++j) {
        try {
            beta_bounds(j, s, data);
        } catch (const InfeasibleRegion&) {
            infeasible = true;
        }
    }
    CHECK(infeasible);
}

TEST_CASE("integrating the auxiliary out recovers the likelihood") {
    Rng rng(9);
    for (int c = 0; c < 5; ++c) {
        Eigen::MatrixXd x = normal_matrix(1, 3, rng);
        const double y = std::exp(rng.normal());
        const int delta = c % 2;
        WeibullParams params;
        params.theta = std::exp(0.5 * rng.normal());
        params.beta0 = rng.normal();
        params.beta = Eigen::VectorXd(3);
        for (auto& b : params.beta) b = 0.5 * rng.normal();
        auto data = SurvivalDataset::unscaled(Eigen::VectorXd::Constant(1, y), Eigen::VectorXi::Constant(1, delta), x);
        const double eta = params.beta0 + x.row(0).dot(params.beta);
        const double threshold = std::pow(y, params.theta) * std::exp(-params.theta * eta);
        boost::math::quadrature::exp_sinh<double> q;
        const double tail = q.integrate([](double v) { return std::exp(-v); }, threshold, kInf);
        const double augmented =
            delta * (std::log(params.theta) + (params.theta - 1) * std::log(y) - params.theta * eta) + std::log(tail);
        CHECK(log_likelihood(data, params) == doctest::Approx(augmented).epsilon(1e-6));
    }
}

TEST_CASE("kernel keeps the simplex and the auxiliaries feasible") {
    Rng rng(5);
    Eigen::MatrixXd x = normal_matrix(80, 6, rng);
    Eigen::VectorXd beta(6);
    beta << 1.0, 0.0, -0.7, 0.0, 0.0, 0.4;
    auto data = weibull_data(x, beta, 0.3, std::exp(0.5), 0.7, rng);
    for (ShrinkageKind kind : {ShrinkageKind::r2d2, ShrinkageKind::horseshoe, ShrinkageKind::gaussian}) {
        auto config = small_config(400, 200, 1, 1);
        if (kind == ShrinkageKind::r2d2) prepare_r2d2(data, config);
        WeibullGibbsKernel kernel(data, config, kind);
        Rng chain(77);
        kernel.initialize(chain);
        for (int t = 0; t < 400; ++t) {
            kernel.set_warmup(t < 100);
            kernel.sweep(chain);
            const auto& s = kernel.state();
            REQUIRE(std::abs(s.phi.sum() - 1.0) < 1e-12);
            REQUIRE(s.phi.minCoeff() > 0.0);
            REQUIRE(s.W > 0.0);
            REQUIRE(s.gamma > 0.0);
            const double theta = std::exp(s.log_theta);
            const Eigen::VectorXd eta = kernel.linear_predictor();
            for (Eigen::Index i = 0; i < data.n(); ++i)
                REQUIRE(s.log_u[i] > theta * (data.log_times()[i] - eta[i]));
        }
    }
}

TEST_CASE("Geweke joint distribution test") {
    // fixed-Gaussian prior so the marginal of every parameter is known exactly
    const Eigen::Index n = 20, p = 2;
    Rng rng(314);
    Eigen::MatrixXd x = normal_matrix(n, p, rng);
    SamplerConfig config = small_config(10, 0, 1, 1);
    config.sig2_b0 = 0.5;
    config.t2 = 0.05;
    config.coef_prior_var = 0.25;
    auto draw_data = [&](const ChainState& s) {
        const double theta = std::exp(s.log_theta);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y[i] = std::exp(s.beta0 + x.row(i).dot(s.beta)) * std::pow(rng.exponential(), 1.0 / theta);
        return SurvivalDataset::unscaled(y, Eigen::VectorXi::Ones(n), x);
    };

    ChainState s;
    s.beta0 = rng.normal(0.0, std::sqrt(config.sig2_b0));
    s.log_theta = rng.normal(0.0, std::sqrt(config.t2));
    s.beta = Eigen::VectorXd(p);
    for (auto& b : s.beta) b = rng.normal(0.0, std::sqrt(config.coef_prior_var));
    s.phi = Eigen::VectorXd::Constant(p, 0.5);
    s.W = config.coef_prior_var * p;
    SurvivalDataset data = draw_data(s);
    WeibullGibbsKernel kernel(data, config, ShrinkageKind::gaussian);
    kernel.initialize(rng);
    s.beta0_scale = 0.3;
    s.log_theta_scale = 0.15;
    kernel.set_state(s);

    const int m = 200000;
    std::vector<std::vector<double>> g(6, std::vector<double>(m));
    for (int t = 0; t < m; ++t) {
        kernel.sweep(rng);
        const auto& st = kernel.state();
        g[0][t] = st.beta0;
        g[1][t] = st.log_theta;
        g[2][t] = st.beta[0];
        g[3][t] = st.beta[1];
        g[4][t] = st.beta0 * st.beta0;
        g[5][t] = st.beta[0] * st.beta[0];
        data = draw_data(st);
        kernel.set_data(data);
    }
    const double expected[] = {0, 0, 0, 0, config.sig2_b0, config.coef_prior_var};
    for (int k = 0; k < 6; ++k) {
        const double mean = std::accumulate(g[k].begin(), g[k].end(), 0.0) / m;
        CAPTURE(k);
        CHECK(std::abs(mean - expected[k]) < 3.0 * batch_se(g[k]));
    }
}

TEST_CASE("Geweke joint distribution test, R2D2 block") {
    // T_j = phi_j W ~ Gamma(a*/p, gamma), gamma ~ Gamma(b*, d*):
    // E[W] = a* d* / (b* - 1), E[gamma] = b* / d*, E[beta_j^2] = E[W] / p
    const Eigen::Index n = 20, p = 2;
    Rng rng(2718);
    Eigen::MatrixXd x = normal_matrix(n, p, rng);
    SamplerConfig config = small_config(10, 0, 1, 1);
    config.sig2_b0 = 0.5;
    config.t2 = 0.05;
    config.gbp = GBPParams{2.0, 6.0, 1.0, 2.0};
    auto draw_data = [&](const ChainState& s) {
        const double theta = std::exp(s.log_theta);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y[i] = std::exp(s.beta0 + x.row(i).dot(s.beta)) * std::pow(rng.exponential(), 1.0 / theta);
        return SurvivalDataset::unscaled(y, Eigen::VectorXi::Ones(n), x);
    };

    ChainState s;
    s.beta0 = rng.normal(0.0, std::sqrt(config.sig2_b0));
    s.log_theta = rng.normal(0.0, std::sqrt(config.t2));
    s.gamma = rng.gamma(config.gbp.b_star, config.gbp.d_star);
    Eigen::VectorXd t(p);
    for (auto& v : t) v = rng.gamma(config.gbp.a_star / p, s.gamma);
    s.W = t.sum();
    s.phi = t / s.W;
    s.beta = Eigen::VectorXd(p);
    for (Eigen::Index j = 0; j < p; ++j) s.beta[j] = rng.normal(0.0, std::sqrt(t[j]));
    SurvivalDataset data = draw_data(s);
    WeibullGibbsKernel kernel(data, config, ShrinkageKind::r2d2);
    kernel.initialize(rng);
    s.beta0_scale = 0.3;
    s.log_theta_scale = 0.15;
    kernel.set_state(s);

    const int m = 200000;
    std::vector<std::vector<double>> g(6, std::vector<double>(m));
    for (int i = 0; i < m; ++i) {
        kernel.sweep(rng);
        const auto& st = kernel.state();
        g[0][i] = st.beta0;
        g[1][i] = st.log_theta;
        g[2][i] = st.beta[0];
        g[3][i] = st.beta[1] * st.beta[1];
        g[4][i] = st.W;
        g[5][i] = st.gamma;
        CHECK_MESSAGE(std::abs(st.phi.sum() - 1.0) < 1e-12, "simplex");
        data = draw_data(st);
        kernel.set_data(data);
    }
    const double ew = 2.0 * 2.0 / 5.0;
    const double expected[] = {0, 0, 0, ew / p, ew, 3.0};
    for (int k = 0; k < 6; ++k) {
        const double mean = std::accumulate(g[k].begin(), g[k].end(), 0.0) / m;
        CAPTURE(k);
        CAPTURE(mean);
        CHECK(std::abs(mean - expected[k]) < 3.0 * batch_se(g[k]));
    }
}

TEST_CASE("seed reproducibility and column exchange") {
    Rng rng(8);
    Eigen::MatrixXd x = normal_matrix(100, 5, rng);
    Eigen::VectorXd beta(5);
    beta << 1.2, 0.0, -0.8, 0.0, 0.0;
    Rng gen(4);
    auto data = weibull_data(x, beta, 0.0, std::exp(0.5), 0.65, gen);
    auto config = small_config(6000, 2000, 2, 1);
    prepare_r2d2(data, config);
    Rng a(123), b(123);
    auto first = run_r2d2_chain(data, config, a);
    auto second = run_r2d2_chain(data, config, b);
    CHECK(first.draws == second.draws);
    CHECK(first.draws.rows() == config.retained());

    // exchanging columns 0 and 2 exchanges their posteriors (in law)
    Eigen::MatrixXd xs = x;
    xs.col(0).swap(xs.col(2));
    Rng gen2(4);
    Eigen::VectorXd beta_s = beta;
    std::swap(beta_s[0], beta_s[2]);
    auto swapped_data = weibull_data(xs, beta_s, 0.0, std::exp(0.5), 0.65, gen2);
    auto long_config = small_config(30000, 6000, 3, 1);
    long_config.gbp = config.gbp;
    Rng c(5), d(6);
    auto orig = run_r2d2_chain(data, long_config, c);
    auto swap = run_r2d2_chain(swapped_data, long_config, d);
    for (auto [j, k] : {std::pair{0, 2}, std::pair{2, 0}, std::pair{1, 1}}) {
        const auto& so = orig.coefficient_summary(j);
        const auto& ss = swap.coefficient_summary(k);
        CHECK(std::abs(so.median - ss.median) < 0.1 + 0.1 * std::abs(so.median));
        CHECK(std::abs(so.sd - ss.sd) < 0.3 * so.sd + 0.02);
    }
}

TEST_CASE("null data credible intervals cover zero") {
    for (ShrinkageKind kind : {ShrinkageKind::r2d2, ShrinkageKind::horseshoe}) {
        int covered = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Rng rng(1000 + seed);
            Eigen::MatrixXd x = normal_matrix(100, 10, rng);
            auto data = weibull_data(x, Eigen::VectorXd::Zero(10), 0.0, std::exp(0.5), 0.65, rng);
            auto config = SamplerConfig::desk();
            if (kind == ShrinkageKind::r2d2) prepare_r2d2(data, config);
            Rng chain(seed);
            auto draws = run_weibull_chain(data, config, kind, chain);
            bool all = true;
            for (Eigen::Index j = 0; j < 10; ++j) {
                const auto& s = draws.coefficient_summary(j);
                all = all && s.lower <= 0.0 && s.upper >= 0.0;
            }
            covered += all;
        }
        CAPTURE(static_cast<int>(kind));
        CHECK(covered >= 8);
    }
}

TEST_CASE("adapted MH acceptance lies in the target band") {
    Rng rng(12);
    Eigen::MatrixXd x = normal_matrix(150, 8, rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(8);
    beta[0] = 1.5;
    beta[4] = -1.0;
    auto data = weibull_data(x, beta, 0.5, std::exp(0.5), 0.65, rng);
    auto config = SamplerConfig::desk();
    prepare_r2d2(data, config);
    Rng chain(3);
    auto draws = run_r2d2_chain(data, config, chain);
    for (const char* block : {"beta0", "log_theta"}) {
        CAPTURE(block);
        CHECK(draws.acceptance.at(block) >= 0.30);
        CHECK(draws.acceptance.at(block) <= 0.50);
    }
    // the posterior summary is ordered
    for (const auto& s : draws.summary) {
        CHECK(s.lower <= s.median);
        CHECK(s.median <= s.upper);
    }
}

TEST_CASE("fixed-Gaussian chain") {
    SUBCASE("prior only") {
        auto data = SurvivalDataset::unscaled(Eigen::VectorXd(0), Eigen::VectorXi(0), Eigen::MatrixXd(0, 2));
        auto config = SamplerConfig::gaussian_outcome();
        Rng rng(2);
        auto draws = run_gaussian_weibull_chain(data, config, rng);
        for (Eigen::Index j = 0; j < 2; ++j) {
            Eigen::VectorXd b = draws.coefficients().col(j);
            const double mean = b.mean();
            const double var = (b.array() - mean).square().mean();
            CHECK(std::abs(mean) < 0.3);
            CHECK(var == doctest::Approx(100.0).epsilon(0.05));
        }
        Eigen::VectorXd b0 = draws.column("beta0");
        const double m0 = b0.mean();
        CHECK(std::abs(m0) < 1.5);
        CHECK((b0.array() - m0).square().mean() == doctest::Approx(100.0).epsilon(0.2));
    }
    SUBCASE("no covariates concentrates at the MLE") {
        Rng rng(6);
        const double theta = std::exp(0.5);
        Eigen::VectorXd y(500);
        for (auto& v : y) v = std::exp(1.0) * std::pow(rng.exponential(), 1.0 / theta);
        auto data = SurvivalDataset::unscaled(y, Eigen::VectorXi::Ones(500), Eigen::MatrixXd(500, 0));
        auto config = SamplerConfig::gaussian_outcome();
        config.iterations = 8000;
        config.burn_in = 2000;
        Rng chain(1);
        auto draws = run_gaussian_weibull_chain(data, config, chain);
        const double mle = weibull_mle_theta(data);
        const double post = std::exp(draws.summary[draws.index("log_theta")].median);
        CHECK(post == doctest::Approx(mle).epsilon(0.03));
    }
    SUBCASE("recovers coefficients") {
        Rng rng(15);
        Eigen::MatrixXd x = normal_matrix(500, 5, rng);
        auto probe = SurvivalDataset::from_raw(Eigen::VectorXd::Ones(500), Eigen::VectorXi::Ones(500), x);
        Eigen::VectorXd beta(5);
        beta << 0.8, -0.5, 0.0, 0.3, 0.0;
        Eigen::VectorXd y(500);
        for (Eigen::Index i = 0; i < 500; ++i)
            y[i] = std::exp(0.2 + probe.x().row(i).dot(beta)) * std::pow(rng.exponential(), 1.0 / 1.5);
        auto data = SurvivalDataset::from_raw(y, Eigen::VectorXi::Ones(500), x);
        auto config = SamplerConfig::gaussian_outcome();
        config.iterations = 10000;
        config.burn_in = 3000;
        Rng chain(2);
        auto draws = run_gaussian_weibull_chain(data, config, chain);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const auto& s = draws.coefficient_summary(j);
            CAPTURE(j);
            CHECK(std::abs(s.median - beta[j]) < 4.0 * s.sd);
        }
    }
}

TEST_CASE("Bayesian R^2 draws") {
    PosteriorDraws d;
    d.names = {"beta0", "log_theta", "W"};
    d.draws = Eigen::MatrixXd::Zero(5, 3);
    CHECK(bayes_r2_posterior(d).isZero());
    Rng rng(1);
    d.draws.resize(200, 3);
    for (Eigen::Index t = 0; t < 200; ++t) {
        d.draws(t, 0) = 0.0;
        d.draws(t, 1) = 0.5;
        d.draws(t, 2) = 5.0 * rng.uniform();
    }
    auto r2 = bayes_r2_posterior(d);
    std::vector<Eigen::Index> by_w(200);
    std::iota(by_w.begin(), by_w.end(), 0);
    std::vector<Eigen::Index> by_r2(by_w);
    std::sort(by_w.begin(), by_w.end(), [&](auto a, auto b) { return d.draws(a, 2) < d.draws(b, 2); });
    std::sort(by_r2.begin(), by_r2.end(), [&](auto a, auto b) { return r2[a] < r2[b]; });
    CHECK(by_w == by_r2);
    CHECK(r2[0] == doctest::Approx(r2_from_w(d.draws(0, 2), std::exp(0.5))));
}

TEST_CASE("mediator chains") {
    SUBCASE("linear regression recovers coefficients") {
        Rng rng(10);
        Eigen::MatrixXd xs = normal_matrix(300, 3, rng);
        for (Eigen::Index k = 0; k < 3; ++k) {
            xs.col(k).array() -= xs.col(k).mean();
            xs.col(k) /= std::sqrt(xs.col(k).squaredNorm() / 299.0);
        }
        Eigen::Vector3d alpha(0.6, -0.3, 0.0);
        Eigen::VectorXd m = (xs * alpha).array() + 0.5;
        for (auto& v : m) v += rng.normal();
        MediatorConfig config;
        Rng chain(3);
        auto draws = run_linear_chain(m, xs, config, chain);
        CHECK(draws.names.back() == "tau2");
        CHECK(draws.summary[0].mean == doctest::Approx(0.5).epsilon(0.5));
        for (Eigen::Index k = 0; k < 3; ++k) {
            const auto& s = draws.coefficient_summary(k);
            CHECK(std::abs(s.mean - alpha[k]) < 3.0 * s.sd);
        }
    }
    SUBCASE("logistic null coefficients are covered") {
        int covered = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Rng rng(500 + seed);
            Eigen::MatrixXd xs = normal_matrix(200, 3, rng);
            Eigen::VectorXd m(200);
            for (auto& v : m) v = rng.uniform() < 0.4 ? 1.0 : 0.0;
            MediatorConfig config;
            config.iterations = 8000;
            config.burn_in = 2000;
            Rng chain(seed);
            auto draws = run_logistic_chain(m, xs, config, chain);
            bool all = true;
            for (Eigen::Index k = 0; k < 3; ++k) {
                const auto& s = draws.coefficient_summary(k);
                all = all && s.lower <= 0 && s.upper >= 0;
            }
            covered += all;
        }
        CHECK(covered >= 8);
    }
    SUBCASE("constant mediator is flagged") {
        Rng rng(1);
        Eigen::MatrixXd xs = normal_matrix(100, 2, rng);
        MediatorConfig config;
        config.iterations = 3000;
        config.burn_in = 1000;
        Rng chain(1);
        auto draws = run_logistic_chain(Eigen::VectorXd::Ones(100), xs, config, chain);
        CHECK_FALSE(draws.warnings.empty());
    }
    SUBCASE("length mismatch") {
        Rng chain(1);
        CHECK_THROWS_AS(run_linear_chain(Eigen::VectorXd::Ones(5), Eigen::MatrixXd::Ones(4, 2), MediatorConfig{}, chain),
                        LengthMismatch);
    }
}

TEST_CASE("config validation") {
    auto c = SamplerConfig::desk();
    CHECK(c.retained() == 4666);
    c.burn_in = c.iterations;
    CHECK_THROWS_AS(c.validate(), InvalidParams);
    c = SamplerConfig::desk();
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(), InvalidParams);
    c = SamplerConfig::desk();
    c.t2 = 0;
    CHECK_THROWS_AS(c.validate(), InvalidParams);
    CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({1, 2, 3, 4}, 0.025) == doctest::Approx(1.075));
}

}
