#include "r2d2surv/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>
#include <gsl/gsl_sf_erf.h>

#include "r2d2surv/errors.hpp"

namespace r2d2surv {

namespace {

// ---- GIG with chi = psi = omega, lambda >= 0 ----------------------------------

double gig_mode(double lambda, double omega) {
    if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
    return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms with mode shift (Dagpunar / Lehner); lambda > 2 or omega > 3.
double rou_shift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

    // Roots of the cubic give the extremes of (x - xm) sqrt(f(x)).
    const double a = -(2.0 * (lambda + 1.0) / omega + xm);
    const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    const double c = xm;
    const double p = b - a * a / 3.0;
    const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
    const double fak = 2.0 * std::sqrt(-p / 3.0);
    const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
    const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
    const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
    const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

    while (true) {
        const double u = uminus + rng.uniform() * (uplus - uminus);
        const double v = rng.uniform();
        const double x = u / v + xm;
        if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

// Ratio-of-uniforms without shift; moderate lambda and omega.
double rou_noshift(double lambda, double omega, Rng& rng) {
    const double t = 0.5 * (lambda - 1.0);
    const double s = 0.25 * omega;
    const double xm = gig_mode(lambda, omega);
    const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
    const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
    const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);

    while (true) {
        const double u = um * rng.uniform();
        const double v = rng.uniform();
        const double x = u / v;
        if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
    }
}

// Rejection from a three-piece hat for the non-T-concave region
// (0 <= lambda < 1, small omega).
double concave_hat(double lambda, double omega, Rng& rng) {
    const double xm = gig_mode(lambda, omega);
    const double x0 = omega / (1.0 - lambda);
    const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
    double area[3];
    area[0] = k0 * x0;
    double k1 = 0.0;
    double k2 = 0.0;
    if (x0 >= 2.0 / omega) {
        area[1] = 0.0;
        k2 = std::pow(x0, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
    } else {
        k1 = std::exp(-omega);
        area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                                : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
        k2 = std::pow(2.0 / omega, lambda - 1.0);
        area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
    }
    const double total = area[0] + area[1] + area[2];

    while (true) {
        double v = total * rng.uniform();
        double x;
        double hx;
        if (v <= area[0]) {
            x = x0 * v / area[0];
            hx = k0;
        } else if ((v -= area[0]) <= area[1]) {
            if (lambda == 0.0) {
                x = omega * std::exp(std::exp(omega) * v);
                hx = k1 / x;
            } else {
                x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
                hx = k1 * std::pow(x, lambda - 1.0);
            }
        } else {
            v -= area[1];
            const double a = std::max(x0, 2.0 / omega);
            x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * a) - omega / (2.0 * k2) * v);
            hx = k2 * std::exp(-omega / 2.0 * x);
        }
        const double u = rng.uniform() * hx;
        if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
    }
}

double standard_gig(double lambda, double omega, Rng& rng) {
    if (lambda > 2.0 || omega > 3.0) return rou_shift(lambda, omega, rng);
    if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return rou_noshift(lambda, omega, rng);
    return concave_hat(lambda, omega, rng);
}

// ---- truncated normal on the standard scale --------------------------------------

constexpr double kSqrt2 = std::numbers::sqrt2;

double upper_tail(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Accept z ~ U(a, b) with probability exp((peak^2 - z^2) / 2), where peak is
// the point of the region closest to 0.
double uniform_rejection(double a, double b, double peak, Rng& rng) {
    while (true) {
        const double z = a + (b - a) * rng.uniform();
        if (std::log(rng.uniform()) <= 0.5 * (peak * peak - z * z)) return z;
    }
}

// Robert (1995) translated-exponential proposal for a >= 4.
double exponential_tail(double a, double b, Rng& rng) {
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    while (true) {
        const double z = a + rng.exponential() / rate;
        if (z >= b) continue;
        const double d = z - rate;
        if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
    }
}

// Standard normal restricted to (a, b) with a >= 0.
double right_region(double a, double b, Rng& rng) {
    if (std::isfinite(b) && b * b - a * a < 1.0) return uniform_rejection(a, b, a, rng);
    if (a >= 4.0) return exponential_tail(a, b, rng);
    const double lo = std::isfinite(b) ? upper_tail(b) : 0.0;
    const double hi = upper_tail(a);
    const double u = lo + (hi - lo) * rng.uniform();
    return kSqrt2 * boost::math::erfc_inv(2.0 * u);
}

double standard_truncated_normal(double a, double b, Rng& rng) {
    if (std::isinf(a) && std::isinf(b)) return rng.normal();
    if (a >= 0.0) return std::clamp(right_region(a, b, rng), a, b);
    if (b <= 0.0) return std::clamp(-right_region(-b, -a, rng), a, b);
    // 0 lies inside (a, b).
    if (b - a < 0.25) return uniform_rejection(a, b, 0.0, rng);
    const double pa = std::isinf(a) ? 0.0 : 0.5 * std::erfc(-a / kSqrt2);
    const double pb = std::isinf(b) ? 1.0 : 0.5 * std::erfc(-b / kSqrt2);
    const double u = pa + (pb - pa) * rng.uniform();
    const double z = u < 0.5 ? -kSqrt2 * boost::math::erfc_inv(2.0 * u) : kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - u));
    return std::clamp(z, a, b);
}

}  // namespace

double sample_gig(const GIGSpec& spec, Rng& rng) {
    const double chi = spec.chi;
    const double psi = spec.psi;
    const double lambda = spec.lambda;
    if (!std::isfinite(chi) || !std::isfinite(psi) || !std::isfinite(lambda) || chi < 0.0 || psi < 0.0)
        throw InvalidParams("GIG parameters must be finite with chi, psi >= 0");
    if (chi == 0.0) {
        if (!(lambda > 0.0) || !(psi > 0.0)) throw InvalidParams("GIG with chi = 0 needs lambda > 0 and psi > 0");
        return rng.gamma(lambda, psi / 2.0);
    }
    if (psi == 0.0) {
        if (!(lambda < 0.0)) throw InvalidParams("GIG with psi = 0 needs lambda < 0");
        return 1.0 / rng.gamma(-lambda, chi / 2.0);
    }

    const double omega = std::sqrt(chi * psi);
    const double abs_lambda = std::abs(lambda);
    // Far below omega ~ 1e-8 the chi (or psi) term only perturbs the law at
    // relative order omega^2, so use the gamma limit directly.
    if (omega < 1e-8 && abs_lambda >= 1.0)
        return lambda > 0.0 ? rng.gamma(lambda, psi / 2.0) : 1.0 / rng.gamma(-lambda, chi / 2.0);

    const double alpha = std::sqrt(chi / psi);
    const double x = standard_gig(abs_lambda, omega, rng);
    return lambda < 0.0 ? alpha / x : alpha * x;
}

double sample_truncated_normal(double mean, double sd, double lower, double upper, Rng& rng) {
    if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) throw InvalidParams("truncated normal needs sd > 0");
    if (!(lower < upper)) throw EmptyRegion("truncation region is empty");
    const double a = (lower - mean) / sd;
    const double b = (upper - mean) / sd;
    if (!(a < b)) throw EmptyRegion("truncation region is empty at this scale");
    const double x = mean + sd * standard_truncated_normal(a, b, rng);
    return std::clamp(x, lower, upper);
}

namespace {

// log of the upper tail 1 - Phi(x)
double log_upper_tail(double x) {
    if (x == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return gsl_sf_log_erfc(x / std::numbers::sqrt2) - std::numbers::ln2;
}

double log_diff(double big, double small) { return big + std::log1p(-std::exp(small - big)); }

}  // namespace

double log_normal_mass(double a, double b) {
    if (!(a < b)) return -std::numeric_limits<double>::infinity();
    if (a >= 0.0) return log_diff(log_upper_tail(a), log_upper_tail(b));
    if (b <= 0.0) return log_diff(log_upper_tail(-b), log_upper_tail(-a));
    return std::log1p(-std::exp(log_upper_tail(b)) - std::exp(log_upper_tail(-a)));
}

double sample_truncated_exponential(double lower, Rng& rng) {
    if (!(lower >= 0.0) || !std::isfinite(lower)) throw InvalidParams("truncated exponential needs finite lower >= 0");
    return lower + rng.exponential();
}

}  // namespace r2d2surv
