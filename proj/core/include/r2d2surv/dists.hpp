#pragma once

#include "r2d2surv/rng.hpp"

namespace r2d2surv {

// Generalized inverse Gaussian law with density proportional to
// x^(lambda-1) exp(-(chi/x + psi x) / 2) on x > 0.
struct GIGSpec {
    double chi = 1.0;
    double psi = 1.0;
    double lambda = 0.0;
};

/// Exact GIG draw (Hoermann & Leydold 2014 ratio-of-uniforms family; the
/// reciprocal identity covers lambda < 0). Boundary cases chi = 0 and psi = 0
/// reduce to gamma and inverse-gamma draws. Throws InvalidParams for an
/// improper or non-finite specification.
double sample_gig(const GIGSpec& spec, Rng& rng);

/// N(mean, sd^2) restricted to (lower, upper); either bound may be infinite.
/// Throws EmptyRegion when lower >= upper.
double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng);

/// log(Phi(b) - Phi(a)) for a < b, accurate far into either tail.
double log_normal_mass(double a, double b);

/// lower + Exp(1), i.e. Exp(1) conditioned to exceed lower.
double sample_truncated_exponential(double lower, Rng& rng);

}  // namespace r2d2surv
