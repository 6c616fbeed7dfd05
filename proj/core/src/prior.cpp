#include "r2d2surv/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gsl/gsl_multimin.h>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Stand-in for +inf inside the simplex search.
constexpr double kHuge = 1e100;

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void check_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidParams("Weibull shape must be positive and finite");
}

void check_hyper(const R2D2Hyper& h) {
    if (!(h.a > 0.0) || !(h.b > 0.0)) throw InvalidParams("Beta hyperparameters must be positive");
}

// R^2 = ratio (1 - e^-w) / (1 - ratio e^-w), ratio = R^2_max.
double r2_from_ratio(double w, double ratio) {
    if (w <= 0.0) return 0.0;
    if (std::isinf(w)) return ratio;
    const double q = std::exp(-w);
    return ratio * (-std::expm1(-w)) / (1.0 - ratio * q);
}

// Density of W when (R^2 / ratio) ~ Beta(a, b) and R^2 = r2_from_ratio(W, ratio).
double log_density_from_ratio(double w, double ratio, double a, double b) {
    if (!(w > 0.0)) return -kInf;
    if (std::isinf(w)) return -kInf;
    const double q = std::exp(-w);
    const double log1m_rq = std::log1p(-ratio * q);
    const double log_scaled = std::log(-std::expm1(-w)) - log1m_rq;
    const double log_one_minus = std::log1p(-ratio) - w - log1m_rq;
    const double log_jac = std::log1p(-ratio) - w - 2.0 * log1m_rq;
    return (a - 1.0) * log_scaled + (b - 1.0) * log_one_minus + log_jac - log_beta_fn(a, b);
}

double safe_exp(double x) { return x < -745.0 ? 0.0 : std::exp(x); }

}  // namespace

double r2_max(double theta) {
    check_theta(theta);
    return std::exp(2.0 * std::lgamma(1.0 + 1.0 / theta) - std::lgamma(1.0 + 2.0 / theta));
}

double r2_from_w(double w, double theta) {
    if (w < 0.0) throw OutOfSupport("W must be non-negative");
    return r2_from_ratio(w, r2_max(theta));
}

double w_from_r2(double r2, double theta) {
    const double ratio = r2_max(theta);
    if (!(r2 >= 0.0) || !(r2 < ratio)) throw OutOfSupport("R^2 outside [0, R^2_max)");
    return std::log1p(r2 * (1.0 - ratio) / (ratio - r2));
}

double log_prior_w_density(double w, double theta, const R2D2Hyper& hyper) {
    check_hyper(hyper);
    return log_density_from_ratio(w, r2_max(theta), hyper.a, hyper.b);
}

double prior_w_density(double w, double theta, const R2D2Hyper& hyper) {
    return safe_exp(log_prior_w_density(w, theta, hyper));
}

double gbp_log_density(double x, const GBPParams& p) {
    if (!(x > 0.0) || std::isinf(x)) return -kInf;
    const double t = p.c_star * (std::log(x) - std::log(p.d_star));
    // log(1 + e^t)
    const double softplus = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    return std::log(p.c_star) + (p.a_star * p.c_star - 1.0) * (std::log(x) - std::log(p.d_star)) -
           (p.a_star + p.b_star) * softplus - std::log(p.d_star) - log_beta_fn(p.a_star, p.b_star);
}

double gbp_density(double x, const GBPParams& p) { return safe_exp(gbp_log_density(x, p)); }

double gbp_cdf(double x, const GBPParams& p) {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double z = x / p.d_star;
    return boost::math::ibeta(p.a_star, p.b_star, z / (1.0 + z));
}

double gbp_median(const GBPParams& p) {
    const double q = boost::math::ibeta_inv(p.a_star, p.b_star, 0.5);
    return p.d_star * q / (1.0 - q);
}

QuadratureGrid make_divergence_grid(double theta, const R2D2Hyper& hyper, int panels) {
    check_theta(theta);
    check_hyper(hyper);
    if (panels < 1) throw InvalidParams("quadrature needs at least one panel");

    QuadratureGrid grid;
    double hi = 1.0;
    while (prior_w_density(hi, theta, hyper) >= 1e-12 && hi < 1e6) hi *= 2.0;
    double lo = 1.0;
    // Mass below w behaves like density(w) * w / a near the origin.
    while (prior_w_density(lo, theta, hyper) * lo / hyper.a >= 1e-14 && lo > 1e-300) lo *= 0.5;
    grid.w_lo = lo;
    grid.w_hi = hi;

    using rule = boost::math::quadrature::gauss<double, 10>;
    const auto& x = rule::abscissa();
    const auto& wts = rule::weights();
    const double u_lo = std::log(lo);
    const double width = (std::log(hi) - u_lo) / panels;
    for (int k = 0; k < panels; ++k) {
        const double mid = u_lo + (k + 0.5) * width;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double sign : {-1.0, 1.0}) {
                if (x[i] == 0.0 && sign > 0.0) continue;
                const double u = mid + sign * x[i] * 0.5 * width;
                const double w = std::exp(u);
                grid.nodes.push_back(w);
                grid.weights.push_back(wts[i] * 0.5 * width * w);
                grid.target.push_back(prior_w_density(w, theta, hyper));
            }
        }
    }
    grid.target_lo = prior_w_density(lo, theta, hyper);
    grid.target_hi = prior_w_density(hi, theta, hyper);
    return grid;
}

double pearson_divergence(const GBPParams& gbp, const R2D2Hyper& hyper, const QuadratureGrid& grid) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double lg = gbp_log_density(grid.nodes[i], gbp);
        const double pi = grid.target[i];
        if (lg < -700.0) {
            if (pi > 0.0) return kInf;
            continue;
        }
        const double g = std::exp(lg);
        const double diff = pi - g;
        total += grid.weights[i] * diff * diff / g;
    }

    // Below the grid pi ~ w^(a-1) and g ~ w^(a*-1), so pi^2/g ~ w^(2a - a* - 1),
    // which is only integrable at 0 when 2a > a*.
    {
        const double w = grid.w_lo;
        const double g = gbp_density(w, gbp);
        const double pi_mass = grid.target_lo * w / hyper.a;
        double sq = 0.0;
        if (grid.target_lo > 0.0) {
            const double power = 2.0 * hyper.a - gbp.a_star * gbp.c_star;
            if (power <= 0.0 || g <= 0.0) return kInf;
            sq = grid.target_lo * grid.target_lo / g * w / power;
        }
        total += std::max(0.0, sq - 2.0 * pi_mass + gbp_cdf(w, gbp));
    }
    // Above the grid pi decays like exp(-b w) while g has a polynomial tail.
    {
        const double w = grid.w_hi;
        const double g = gbp_density(w, gbp);
        const double pi_mass = grid.target_hi / hyper.b;
        const double sq = g > 0.0 ? grid.target_hi * grid.target_hi / g / (2.0 * hyper.b) : 0.0;
        total += std::max(0.0, sq - 2.0 * pi_mass + (1.0 - gbp_cdf(w, gbp)));
    }
    return total;
}

namespace {

struct ObjectiveContext {
    const R2D2Hyper* hyper;
    const QuadratureGrid* grid;
    int evaluations = 0;
};

double divergence_objective(const gsl_vector* x, void* raw) {
    auto* ctx = static_cast<ObjectiveContext*>(raw);
    ++ctx->evaluations;
    GBPParams p;
    p.a_star = std::exp(gsl_vector_get(x, 0));
    p.b_star = std::exp(gsl_vector_get(x, 1));
    p.d_star = std::exp(gsl_vector_get(x, 2));
    const double v = pearson_divergence(p, *ctx->hyper, *ctx->grid);
    return std::isfinite(v) ? std::min(v, kHuge) : kHuge;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

GBPFit fit_gbp_approx(double theta, const R2D2Hyper& hyper, const GBPFitOptions& options) {
    const QuadratureGrid grid = make_divergence_grid(theta, hyper, options.panels);
    ObjectiveContext ctx{&hyper, &grid};

    gsl_multimin_function fn;
    fn.n = 3;
    fn.f = &divergence_objective;
    fn.params = &ctx;

    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(3));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(3));
    gsl_vector_set(x.get(), 0, std::log(hyper.a));
    gsl_vector_set(x.get(), 1, std::log(hyper.b));
    gsl_vector_set(x.get(), 2, 0.0);

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));

    bool converged = false;
    // One restart from the first optimum guards against a collapsed simplex.
    for (double initial_step : {0.5, 0.1}) {
        gsl_vector_set_all(step.get(), initial_step);
        gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
        converged = false;
        while (ctx.evaluations < options.max_evaluations) {
            if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), options.simplex_tolerance) ==
                GSL_SUCCESS) {
                converged = true;
                break;
            }
        }
        gsl_vector_memcpy(x.get(), gsl_multimin_fminimizer_x(s.get()));
        if (!converged) break;
    }

    GBPFit fit;
    fit.params.a_star = std::exp(gsl_vector_get(x.get(), 0));
    fit.params.b_star = std::exp(gsl_vector_get(x.get(), 1));
    fit.params.d_star = std::exp(gsl_vector_get(x.get(), 2));
    fit.divergence = pearson_divergence(fit.params, hyper, grid);
    fit.evaluations = ctx.evaluations;
    fit.converged = converged && std::isfinite(fit.divergence);
    fit.ill_conditioned = hyper.a < 0.2 || hyper.b < 0.2;
    if (!fit.converged && !fit.ill_conditioned)
        throw NoConvergence("GBP approximation did not converge within " +
                            std::to_string(options.max_evaluations) + " evaluations");
    return fit;
}

// ---- mixture ------------------------------------------------------------------

MixtureCoefficients mixture_coefficients(double theta, const MixtureSpec& spec) {
    check_theta(theta);
    if (spec.m < 1 || static_cast<int>(spec.beta0s.size()) != spec.m)
        throw InvalidParams("mixture needs m >= 1 component intercepts");
    const double m = spec.m;
    const double g1_sq = std::exp(2.0 * std::lgamma(1.0 + 1.0 / theta));
    const double g2 = std::exp(std::lgamma(1.0 + 2.0 / theta));
    MixtureCoefficients out;
    for (double b0 : spec.beta0s) {
        const double e = std::exp(2.0 * b0);
        out.h += g1_sq * e / (m * m);
        out.k += g1_sq * (2.0 / m - 2.0 / (m * m)) * e;
        out.l += (2.0 / m - 1.0 / (m * m)) * (g2 - g1_sq) * e;
    }
    return out;
}

double mixture_r2_from_w(double w, double theta, const MixtureSpec& spec) {
    if (w < 0.0) throw OutOfSupport("W must be non-negative");
    const auto c = mixture_coefficients(theta, spec);
    return r2_from_ratio(w, c.r2_max());
}

double mixture_prior_w_density(double w, double theta, const MixtureSpec& spec, const R2D2Hyper& hyper) {
    check_hyper(hyper);
    const auto c = mixture_coefficients(theta, spec);
    return safe_exp(log_density_from_ratio(w, c.r2_max(), hyper.a, hyper.b));
}

}  // namespace r2d2surv
