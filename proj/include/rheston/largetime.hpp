#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rheston/smalltime.hpp"

namespace rheston {

// Stable root U1(p) of lambda theta-normalized limiting Riccati equation:
// H(p, w) = (p^2 - p)/2 + (p rho nu - lambda) w + nu^2 w^2 / 2 = 0.
inline double u1(const ModelParams& params, double p) {
    params.validate();
    const double nu = params.nu, rho = params.rho, lam = params.lambda;
    const double rhobar2 = 1.0 - rho * rho;
    double disc = lam * lam - 2.0 * lam * rho * nu * p + nu * nu * p * (1.0 - p * rhobar2);
    // tolerate cancellation noise when p sits exactly on a domain endpoint
    double scale = lam * lam + 2.0 * lam * nu * std::fabs(rho * p) +
                   nu * nu * std::fabs(p) * (1.0 + std::fabs(p));
    if (disc < 0.0 && disc > -1e-10 * scale) disc = 0.0;
    if (disc < 0.0)
        throw std::domain_error("u1: complex roots, p outside the large-time domain");
    return (lam - p * rho * nu - std::sqrt(disc)) / (nu * nu);
}

// Endpoints [p_lower, p_upper] of the effective domain of the limiting cgf.
struct LargeTimeDomain {
    double p_lower = 0.0;
    double p_upper = 0.0;
};

inline LargeTimeDomain domain_endpoints(const ModelParams& params) {
    params.validate();
    if (!(params.lambda > 0.0))
        throw std::domain_error("domain_endpoints: lambda must be positive");
    if (!(params.rho <= 0.0))
        throw std::domain_error("domain_endpoints: requires rho <= 0");
    const double nu = params.nu, rho = params.rho, lam = params.lambda;
    const double rhobar2 = 1.0 - rho * rho;
    double s = std::sqrt(4.0 * lam * lam + nu * nu - 4.0 * lam * rho * nu);
    LargeTimeDomain d;
    d.p_lower = (nu - 2.0 * lam * rho - s) / (2.0 * nu * rhobar2);
    d.p_upper = (nu - 2.0 * lam * rho + s) / (2.0 * nu * rhobar2);
    return d;
}

// Limiting cumulant generating function V(p) = lambda theta U1(p) on
// [p_lower, p_upper], +infinity outside.
inline double limiting_cgf(const ModelParams& params, double p) {
    LargeTimeDomain d = domain_endpoints(params);
    if (p < d.p_lower || p > d.p_upper) return std::numeric_limits<double>::infinity();
    return params.lambda * params.theta * u1(params, p);
}

// Large-time Fenchel-Legendre transform V*(x) = sup_p (p x - V(p)).
inline RatePoint rate_function_large(const ModelParams& params, double x) {
    LargeTimeDomain d = domain_endpoints(params);
    auto objective = [&](double p) { return p * x - limiting_cgf(params, p); };
    double p_star =
        detail::golden_max(objective, d.p_lower * (1.0 - 1e-12) + 1e-14,
                           d.p_upper * (1.0 - 1e-12), 1e-10);
    return {objective(p_star), p_star};
}

// Large-maturity limiting smile sigma_inf^2(x), closed form.
inline double smile_infinity(const ModelParams& params, double x) {
    params.validate();
    if (!(params.lambda > 0.0))
        throw std::domain_error("smile_infinity: lambda must be positive");
    const double nu = params.nu, rho = params.rho, lam = params.lambda, th = params.theta;
    const double rhobar2 = 1.0 - rho * rho;
    double w1 = 4.0 * lam * th / (nu * nu * rhobar2) *
                (std::sqrt((2.0 * lam - rho * nu) * (2.0 * lam - rho * nu) + nu * nu * rhobar2) -
                 (2.0 * lam - rho * nu));
    double w2 = nu / (lam * th);
    double var = 0.5 * w1 *
                 (1.0 + w2 * rho * x +
                  std::sqrt((w2 * x + rho) * (w2 * x + rho) + rhobar2));
    return std::sqrt(var);
}

// Second-order large-time coefficient U2(p).
inline double u2(const ModelParams& params, double p) {
    params.validate();
    double w = u1(params, p);
    double denom = params.lambda - w * params.nu * params.nu - p * params.rho * params.nu;
    if (denom == 0.0) throw std::domain_error("u2: degenerate root (boundary of domain)");
    return -w / (denom * gamma_fn(1.0 - params.alpha));
}

// Long-run behaviour of the Riccati solution at fixed p.
enum class RiccatiCase { A, B, C, D };

struct CaseInfo {
    RiccatiCase label = RiccatiCase::C;
    bool explosive = false;
    double discriminant = 0.0;  // e1 = (lambda - p rho nu)^2 - (p^2 - p) nu^2
    double stable_root = std::numeric_limits<double>::quiet_NaN();
};

inline CaseInfo classify_case(const ModelParams& params, double p) {
    params.validate();
    CaseInfo info;
    const double e0 = params.lambda - p * params.rho * params.nu;
    const double c0 = 0.5 * (p * p - p);
    info.discriminant = e0 * e0 - 2.0 * params.nu * params.nu * c0;
    if (c0 <= 0.0) {
        // p in [0,1]: G(0) <= 0, the solution decreases to the nonpositive root
        info.stable_root = u1(params, p);
        info.label = RiccatiCase::D;
        return info;
    }
    if (info.discriminant >= 0.0 && e0 > 0.0) {
        // both roots positive: convergence to the smaller one
        info.stable_root = u1(params, p);
        info.label = RiccatiCase::C;
        return info;
    }
    // no reachable root: blow-up in finite time
    info.explosive = true;
    info.label = e0 >= 0.0 ? RiccatiCase::A : RiccatiCase::B;
    return info;
}

}  // namespace rheston
