#pragma once

#include <vector>

namespace r2d2surv {

// Beta(a, b) prior on the scaled coefficient of determination R^2 / R^2_max.
struct R2D2Hyper {
    double a = 0.5;
    double b = 0.5;
};

// Generalized Beta Prime GBP(a*, b*, c*, d*). The sampler only uses c* = 1,
// where W | g ~ Gamma(a*, rate g) and g ~ Gamma(b*, rate d*).
struct GBPParams {
    double a_star = 1.0;
    double b_star = 1.0;
    double c_star = 1.0;
    double d_star = 1.0;
};

struct GBPFit {
    GBPParams params;
    double divergence = 0.0;  // Pearson chi^2 divergence at the optimum
    int evaluations = 0;
    bool converged = true;
    // Set for a < 0.2 or b < 0.2, where the fit is known to be unstable.
    bool ill_conditioned = false;
};

// ---- R^2 <-> W ---------------------------------------------------------------

/// Upper bound of R^2 for Weibull shape theta: Gamma(1+1/theta)^2 / Gamma(1+2/theta).
double r2_max(double theta);

/// Bayesian R^2 of the Weibull model as a function of the global variance W.
double r2_from_w(double w, double theta);

/// Inverse of r2_from_w. Throws OutOfSupport unless 0 <= r2 < r2_max(theta).
double w_from_r2(double r2, double theta);

/// Exact prior density of W induced by R^2 / R^2_max ~ Beta(a, b).
double prior_w_density(double w, double theta, const R2D2Hyper& hyper);
double log_prior_w_density(double w, double theta, const R2D2Hyper& hyper);

// ---- Generalized Beta Prime ----------------------------------------------------

double gbp_density(double x, const GBPParams& p);
double gbp_log_density(double x, const GBPParams& p);
/// CDF for c* = 1 (scaled Beta-prime).
double gbp_cdf(double x, const GBPParams& p);
/// Median for c* = 1.
double gbp_median(const GBPParams& p);

// ---- Approximation -----------------------------------------------------------------

// Fixed quadrature rule on (w_lo, w_hi), built in log(w).
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> target;  // exact prior density at the nodes
    double w_lo = 0.0;
    double w_hi = 0.0;
    double target_lo = 0.0;  // exact density at w_lo
    double target_hi = 0.0;  // exact density at w_hi
};

struct GBPFitOptions {
    int panels = 128;            // Gauss-Legendre panels over log(w)
    int max_evaluations = 2000;  // objective budget for Nelder-Mead
    double simplex_tolerance = 1e-7;
};

/// Quadrature grid covering the support of the exact W prior. The upper end is
/// found by doubling until the density drops below 1e-12.
QuadratureGrid make_divergence_grid(double theta, const R2D2Hyper& hyper, int panels = 128);

/// Pearson chi^2 divergence  integral (pi(w) - g(w))^2 / g(w) dw  between the exact
/// prior pi and GBP density g, including analytic tail corrections outside the grid.
double pearson_divergence(const GBPParams& gbp, const R2D2Hyper& hyper, const QuadratureGrid& grid);

/// Fit GBP(a*, b*, 1, d*) to the exact W prior by Nelder-Mead on
/// (log a*, log b*, log d*), starting at (a, b, 1). Deterministic.
///
/// Throws NoConvergence when the evaluation budget runs out, except for
/// ill-conditioned priors (a or b below 0.2), which return the best point
/// with converged = false.
GBPFit fit_gbp_approx(double theta, const R2D2Hyper& hyper, const GBPFitOptions& options = {});

// ---- Weibull scale mixture -----------------------------------------------------------

// Finite mixture of Weibull components that differ only in the intercept.
// sigma2_gamma is the prior variance of the intercept offsets; the R^2 map
// only depends on the component intercepts beta0s.
struct MixtureSpec {
    int m = 1;
    std::vector<double> beta0s{0.0};
    double sigma2_gamma = 1.0;
};

struct MixtureCoefficients {
    double h = 0.0;
    double k = 0.0;
    double l = 0.0;
    double r2_max() const { return h / (h + k + l); }
};

MixtureCoefficients mixture_coefficients(double theta, const MixtureSpec& spec);
double mixture_r2_from_w(double w, double theta, const MixtureSpec& spec);
double mixture_prior_w_density(double w, double theta, const MixtureSpec& spec, const R2D2Hyper& hyper);

}  // namespace r2d2surv
