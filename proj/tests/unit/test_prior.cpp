#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include "r2d2surv/errors.hpp"
#include "r2d2surv/prior.hpp"
#include "r2d2surv/rng.hpp"

using namespace r2d2surv;

namespace {

double integrate_density(double theta, const R2D2Hyper& h) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double w) { return prior_w_density(w, theta, h); }, 1e-12);
}

// CDF of W tabulated on a fine log grid by composite Simpson on w f(w) dlog w.
struct WCdf {
    std::vector<double> logw, cdf;
};

WCdf tabulate_cdf(double theta, const R2D2Hyper& h) {
    WCdf t;
    const double lo = -40.0, hi = std::log(400.0);
    const int cells = 40000;
    const double step = (hi - lo) / cells;
    auto g = [&](double lw) {
        const double w = std::exp(lw);
        return w * prior_w_density(w, theta, h);
    };
    // mass below exp(lo): density ~ C w^(a-1) there, so the mass is about w f(w) / a
    double acc = g(lo) / h.a;
    t.logw.push_back(lo);
    t.cdf.push_back(acc);
    for (int i = 0; i < cells; ++i) {
        const double a = lo + i * step;
        acc += step / 6.0 * (g(a) + 4.0 * g(a + step / 2.0) + g(a + step));
        t.logw.push_back(a + step);
        t.cdf.push_back(acc);
    }
    for (auto& c : t.cdf) c /= acc;
    return t;
}

double sample_w(const WCdf& t, double u) {
    auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), u);
    if (it == t.cdf.begin()) return std::exp(t.logw.front());
    if (it == t.cdf.end()) return std::exp(t.logw.back());
    const auto k = static_cast<std::size_t>(it - t.cdf.begin());
    const double f = (u - t.cdf[k - 1]) / (t.cdf[k] - t.cdf[k - 1]);
    return std::exp(t.logw[k - 1] + f * (t.logw[k] - t.logw[k - 1]));
}

}  // namespace

TEST_SUITE("prior") {

TEST_CASE("R^2 map hand values") {
    CHECK(r2_from_w(0.0, 2.3) == 0.0);
    CHECK(r2_from_w(std::log(2.0), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(r2_max(1.0) == doctest::Approx(0.5));
    CHECK(r2_from_w(60.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w_from_r2(0.0, 1.0) == 0.0);
    CHECK(w_from_r2(1.0 / 3.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(w_from_r2(0.5, 1.0), OutOfSupport);
    CHECK_THROWS_AS(w_from_r2(-0.1, 1.0), OutOfSupport);
    CHECK(r2_max(100.0) > 0.99);
    for (double th : {0.3, 1.0, 2.0, 10.0}) {
        const double m = r2_max(th);
        const double d = std::pow(std::tgamma(1 + 1 / th), 2), c = std::tgamma(1 + 2 / th);
        CHECK(m == doctest::Approx(d / c).epsilon(1e-12));
        CHECK(m > 0.0);
        CHECK(m < 1.0);
    }
}

TEST_CASE("R^2 map is monotone and invertible") {
    for (double th : {0.5, 1.0, std::exp(0.5), 3.0}) {
        double prev = -1.0;
        for (double w = 0.0; w <= 20.0; w += 0.05) {
            const double r = r2_from_w(w, th);
            CHECK(r > prev);
            CHECK(r < r2_max(th));
            prev = r;
            // one ulp of R^2 moves w by ulp / (R^2_max - R^2), which exceeds 1e-10 past w ~ 12
            const double conditioning = std::nextafter(r, 1.0) - r;
            const double bound = std::max(1e-10, 4.0 * conditioning / (r2_max(th) - r));
            if (w <= 10.0) CHECK(std::abs(w_from_r2(r, th) - w) < 1e-10);
            CHECK(std::abs(w_from_r2(r, th) - w) < bound);
        }
    }
}

TEST_CASE("prior density integrates to one") {
    for (double th : {0.5, 1.0, std::exp(0.5), 3.0})
        for (R2D2Hyper h : {R2D2Hyper{0.5, 0.5}, R2D2Hyper{1, 5}, R2D2Hyper{5, 1}, R2D2Hyper{0.5, 4}, R2D2Hyper{4, 0.5}}) {
            CAPTURE(th);
            CAPTURE(h.a);
            CAPTURE(h.b);
            CHECK(std::abs(integrate_density(th, h) - 1.0) < 1e-3);
        }
}

TEST_CASE("flat Beta gives the Jacobian of the R^2 map") {
    const double th = 1.7;
    const double k = std::tgamma(1 + 2 / th) / std::pow(std::tgamma(1 + 1 / th), 2);
    for (double w : {0.01, 0.3, 1.0, 4.0, 12.0}) {
        const double jac = std::exp(w) * (k - 1.0) / std::pow(k * std::exp(w) - 1.0, 2);
        CHECK(prior_w_density(w, th, {1, 1}) == doctest::Approx(jac / r2_max(th)).epsilon(1e-10));
    }
}

TEST_CASE("pushing W through the R^2 map recovers Beta(a, b)") {
    const double th = std::exp(0.5);
    for (R2D2Hyper h : {R2D2Hyper{0.5, 0.5}, R2D2Hyper{1, 5}, R2D2Hyper{5, 1}}) {
        auto table = tabulate_cdf(th, h);
        Rng rng(17);
        const int n = 100000;
        std::vector<double> r(n);
        for (int i = 0; i < n; ++i) r[i] = r2_from_w(sample_w(table, rng.uniform()), th) / r2_max(th);
        std::sort(r.begin(), r.end());
        boost::math::beta_distribution<double> beta(h.a, h.b);
        double ks = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = boost::math::cdf(beta, std::clamp(r[i], 0.0, 1.0));
            ks = std::max({ks, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
        }
        CAPTURE(h.a);
        CHECK(ks < 0.02);
    }
}

TEST_CASE("GBP density") {
    using boost::math::quadrature::exp_sinh;
    exp_sinh<double> q;
    GBPParams p{2, 3, 1, 1};
    CHECK(q.integrate([&](double x) { return gbp_density(x, p); }, 1e-13) == doctest::Approx(1.0).epsilon(1e-6));
    GBPParams p2{2.5, 1.5, 2.0, 0.7};
    CHECK(q.integrate([&](double x) { return gbp_density(x, p2); }, 1e-13) == doctest::Approx(1.0).epsilon(1e-6));
    for (double x : {0.1, 1.0, 3.0}) {
        const double bp = std::pow(x, 1.0) / std::pow(1 + x, 5.0) / boost::math::beta(2.0, 3.0);
        CHECK(gbp_density(x, p) == doctest::Approx(bp).epsilon(1e-12));
    }
    CHECK(gbp_density(1e-12, p) < 1e-10);
}

TEST_CASE("GBP with c = 1 is the compound gamma law") {
    GBPParams p{0.8, 3.5, 1, 2.2};
    double worst = 0.0;
    for (double x = 0.05; x < 10.0; x *= 1.3) {
        // integral over g of Gamma(x; a*, rate g) Gamma(g; b*, rate d*)
        auto integrand = [&](double g) {
            const double lx = p.a_star * std::log(g) + (p.a_star - 1) * std::log(x) - g * x - std::lgamma(p.a_star);
            const double lg = p.b_star * std::log(p.d_star) + (p.b_star - 1) * std::log(g) - p.d_star * g -
                              std::lgamma(p.b_star);
            return std::exp(lx + lg);
        };
        boost::math::quadrature::exp_sinh<double> q;
        const double mix = q.integrate(integrand, 1e-14);
        worst = std::max(worst, std::abs(mix - gbp_density(x, p)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("GBP fit quality, determinism and grid stability") {
    const double th = std::exp(0.5);
    auto fit = fit_gbp_approx(th, {0.5, 0.5});
    CHECK(fit.divergence < 0.05);
    CHECK(fit.params.a_star > 0);
    CHECK(fit.params.b_star > 0);
    CHECK(fit.params.d_star > 0);
    CHECK(fit.params.c_star == 1.0);
    auto again = fit_gbp_approx(th, {0.5, 0.5});
    CHECK(again.params.a_star == fit.params.a_star);
    CHECK(again.params.d_star == fit.params.d_star);
    CHECK(again.divergence == fit.divergence);

    for (R2D2Hyper h : {R2D2Hyper{0.5, 0.5}, R2D2Hyper{1, 5}, R2D2Hyper{5, 1}}) {
        auto base = fit_gbp_approx(th, h);
        GBPFitOptions fine;
        fine.panels = 512;
        auto refined = fit_gbp_approx(th, h, fine);
        CAPTURE(h.a);
        CHECK(std::abs(refined.divergence - base.divergence) <= 0.1 * base.divergence + 1e-9);
    }
}

TEST_CASE("extreme hyperparameters are flagged") {
    bool flagged = false;
    try {
        auto fit = fit_gbp_approx(std::exp(0.5), {0.05, 0.05});
        flagged = fit.ill_conditioned;
    } catch (const NoConvergence&) {
        flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("mixture R^2") {
    const double th = std::exp(0.5);
    MixtureSpec one{1, {0.4}, 1.0};
    for (double w = 0.0; w < 15.0; w += 0.37) CHECK(std::abs(mixture_r2_from_w(w, th, one) - r2_from_w(w, th)) < 1e-12);
    MixtureSpec two{2, {0.0, 0.5}, 1.0};
    CHECK(mixture_r2_from_w(0.0, th, two) == 0.0);

    // the written h, k, l
    const double d = std::pow(std::tgamma(1 + 1 / th), 2), c = std::tgamma(1 + 2 / th);
    double h = 0, k = 0, l = 0;
    for (double b0 : {0.0, 0.5}) {
        h += d * std::exp(2 * b0) / 4.0;
        k += d * (1.0 - 0.5) * std::exp(2 * b0);
        l += (1.0 - 0.25) * (c - d) * std::exp(2 * b0);
    }
    const double w = 1.3;
    const double expect = (h * std::exp(w) - h) / ((h + k + l) * std::exp(w) - h);
    CHECK(mixture_r2_from_w(w, th, two) == doctest::Approx(expect).epsilon(1e-12));

    boost::math::quadrature::exp_sinh<double> q;
    const double mass = q.integrate([&](double x) { return mixture_prior_w_density(x, th, two, {1, 5}); }, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

}
