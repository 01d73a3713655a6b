#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "rheston/mgf.hpp"
#include "rheston/smalltime.hpp"

namespace rheston {

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Gauss-Legendre rule on [a, b]; nodes by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;

    GaussLegendre(std::size_t n, double a, double b) {
        if (n < 2) throw std::invalid_argument("GaussLegendre: need >= 2 points");
        x.resize(n);
        w.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Chebyshev initial guess for the i-th root of P_n
            double z = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * double(j) + 1.0) * z * p1 - double(j) * p2) / (double(j) + 1.0);
                }
                pp = double(n) * (z * p0 - p1) / (z * z - 1.0);
                double dz = p0 / pp;
                z -= dz;
                if (std::fabs(dz) < 1e-15) break;
            }
            x[i] = 0.5 * (b - a) * (-z) + 0.5 * (a + b);
            w[i] = (b - a) / ((1.0 - z * z) * pp * pp);
        }
    }
};

struct QuadratureSpec {
    std::size_t n_points = 1600;
    double u_max = 40.0;
};

struct PriceResult {
    double price = 0.0;
    double tail = 0.0;  // magnitude of the integrand at the truncation point
    bool accuracy_warning = false;
};

// Forward Black price of a call with log-strike k, maturity t, vol sigma.
inline double black_call(double k, double t, double sigma) {
    if (sigma <= 0.0) return std::max(1.0 - std::exp(k), 0.0);
    double st = sigma * std::sqrt(t);
    double d1 = -k / st + 0.5 * st;
    return norm_cdf(d1) - std::exp(k) * norm_cdf(d1 - st);
}

inline double black_vega(double k, double t, double sigma) {
    double st = sigma * std::sqrt(t);
    double d1 = -k / st + 0.5 * st;
    return norm_pdf(d1) * std::sqrt(t);
}

// Black implied vol of a forward call price; bisection bracket with Newton
// polish, terminating at |price residual| <= 1e-12.
// Time value of the Black call (price minus intrinsic), written so that no
// O(1) cancellation occurs for deep in-the-money strikes.
inline double black_time_value(double k, double t, double sigma) {
    double st = sigma * std::sqrt(t);
    if (st <= 0.0) return 0.0;
    double d1 = -k / st + 0.5 * st;
    double d2 = d1 - st;
    if (k <= 0.0) return std::exp(k) * norm_cdf(-d2) - norm_cdf(-d1);
    return norm_cdf(d1) - std::exp(k) * norm_cdf(d2);
}

inline double implied_vol(double price, double k, double t) {
    double intrinsic = std::max(1.0 - std::exp(k), 0.0);
    if (price < intrinsic - 1e-14 || price > 1.0 + 1e-14)
        throw std::domain_error("implied_vol: price outside no-arbitrage bounds");
    // Invert on the time value: for short maturities or deep strikes the price
    // is dominated by intrinsic and a fixed absolute tolerance on the price
    // would accept anything.
    double target = price - intrinsic;
    if (!(target > 0.0))
        throw std::domain_error("implied_vol: price carries no time value");
    double lo = 1e-10, hi = 10.0;
    double sigma = 0.2;
    for (int it = 0; it < 200; ++it) {
        double diff = black_time_value(k, t, sigma) - target;
        if (std::fabs(diff) <= 1e-12 * std::max(target, 1e-30) || hi - lo < 1e-12 * sigma)
            return sigma;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;
        double vega = black_vega(k, t, sigma);
        double next = sigma - diff / vega;
        sigma = (vega > 1e-300 && next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    return sigma;
}

// Bachelier put E(x - Z)^+ for Z ~ N(0, sigma^2), and its inverse in sigma.
inline double bachelier_put(double x, double sigma) {
    if (sigma <= 0.0) return std::max(x, 0.0);
    double d = x / sigma;
    return x * norm_cdf(d) + sigma * norm_pdf(d);
}

inline double bachelier_inverse(double x, double price) {
    if (price < std::max(x, 0.0) - 1e-14)
        throw std::domain_error("bachelier_inverse: price below intrinsic value");
    double lo = 1e-12, hi = 10.0;
    double sigma = 0.2;
    for (int it = 0; it < 200; ++it) {
        double diff = bachelier_put(x, sigma) - price;
        if (std::fabs(diff) <= 1e-14) return sigma;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;
        double vega = norm_pdf(x / sigma);
        double next = sigma - diff / vega;
        sigma = (vega > 1e-14 && next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    return sigma;
}

// Fourier call pricer: the characteristic values M(1/2 + iu) on the contour
// are computed once per (t, quadrature) and shared across strikes.
class LewisPricer {
  public:
    LewisPricer(const ModelParams& params, double t, const QuadratureSpec& quad = {},
                std::size_t n_steps = 512)
        : t_(t), gl_(quad.n_points, 0.0, quad.u_max) {
        params.validate();
        mgf_.reserve(gl_.x.size());
        for (double u : gl_.x) {
            auto mv = log_mgf(params, std::complex<double>(0.5, u), t, n_steps);
            if (!mv.finite) throw NumericalFailure("LewisPricer: mgf not finite on contour", 0);
            mgf_.push_back(std::exp(mv.log_mgf));
        }
    }

    // C(k) = 1 - sqrt(e^k)/pi * int_0^umax Re[e^{-iuk} M(1/2+iu)] du/(u^2+1/4)
    PriceResult call(double k) const {
        double acc = 0.0;
        double last = 0.0;
        for (std::size_t j = 0; j < gl_.x.size(); ++j) {
            double u = gl_.x[j];
            double re = std::real(std::exp(std::complex<double>(0.0, -u * k)) * mgf_[j]);
            double integrand = re / (u * u + 0.25);
            acc += gl_.w[j] * integrand;
            last = integrand;
        }
        PriceResult out;
        out.price = 1.0 - std::sqrt(std::exp(k)) / M_PI * acc;
        out.tail = std::fabs(last);
        out.accuracy_warning = out.tail > 1e-9;
        return out;
    }

  private:
    double t_;
    GaussLegendre gl_;
    std::vector<std::complex<double>> mgf_;
};

inline PriceResult lewis_call(const ModelParams& params, double k, double t,
                              const QuadratureSpec& quad = {}, std::size_t n_steps = 512) {
    return LewisPricer(params, t, quad, n_steps).call(k);
}

// Small-maturity saddlepoint pricer: Bromwich integral along the vertical
// contour through (a clamped version of) the saddle q* = p*(x) eps^{-alpha},
// with the mgf exponent from the rescaled Riccati solution psi and optional
// first-order correction psi1.
struct ContourConfig {
    std::size_t n_points = 160;
    double u_max = 0.0;  // 0: auto from the saddle curvature
    std::size_t n_steps = 400;
    double pole_clearance = 0.15;
    std::size_t series_terms = 15;
};

inline PriceResult saddle_contour_call(const ModelParams& params, double x, double eps,
                                       bool use_psi1, const ContourConfig& cfg = {}) {
    params.validate();
    if (!(eps > 0.0)) throw std::domain_error("saddle_contour_call: maturity must be positive");
    const double a = params.alpha;
    const double H = params.hurst();
    const double k0 = x * std::pow(eps, 0.5 - H);
    const double eps_a = std::pow(eps, a);

    SmallTimeSmile smile(params, cfg.series_terms);
    RatePoint rp = smile.rate(x);
    auto lb = [&](double p) { return lambda_bar_series(params, p, cfg.series_terms); };
    double hp = 1e-4 * smile.p_limit();
    double lb_dd = (lb(rp.p_star + hp) - 2.0 * lb(rp.p_star) + lb(rp.p_star - hp)) / (hp * hp);
    if (!(lb_dd > 0.0)) lb_dd = params.v0;  // fall back to the Gaussian curvature

    // saddle in moment units, clamped away from the payoff-transform poles
    double q_tilde = rp.p_star / eps_a;
    const double d = cfg.pole_clearance;
    if (std::fabs(q_tilde) < d) q_tilde = q_tilde >= 0.0 ? d : -d;
    if (std::fabs(q_tilde - 1.0) < d) q_tilde = q_tilde >= 1.0 ? 1.0 + d : 1.0 - d;

    double u_max = cfg.u_max > 0.0 ? cfg.u_max : 9.0 / std::sqrt(eps * lb_dd);
    GaussLegendre gl(cfg.n_points, 0.0, u_max);
    FracGrid grid(1.0, cfg.n_steps);

    const double v0_scale = params.v0 * std::pow(eps, -2.0 * H);
    const double drift_scale = params.lambda * params.theta * std::pow(eps, 0.5 - H);

    double acc = 0.0;
    double last = 0.0;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
        std::complex<double> q(q_tilde, gl.x[j]);
        std::complex<double> p = q * eps_a;
        auto psi = solve_adams(RiccatiRhs<std::complex<double>>::driftless(p, params), a, grid);
        if (psi.exploded)
            throw NumericalFailure("saddle_contour_call: psi exploded on contour", psi.n_valid);
        std::vector<std::complex<double>> vals = psi.values;
        if (use_psi1) {
            auto psi1 = solve_psi1(psi, params, p);
            for (std::size_t m = 0; m < vals.size(); ++m)
                vals[m] += eps_a * psi1.values[m];
        }
        // I^{1-alpha} degenerates to the identity at alpha = 1 (classical case)
        std::complex<double> v0_part =
            a == 1.0 ? vals.back() : frac_integral_at_end(vals, grid, 1.0 - a);
        std::complex<double> phi =
            v0_scale * v0_part + drift_scale * frac_integral_at_end(vals, grid, 1.0);
        std::complex<double> integrand = std::exp(-q * k0 + phi) / (q * q - q);
        double re = std::real(integrand);
        acc += gl.w[j] * re;
        last = std::abs(integrand);
    }
    double contour_value = std::exp(k0) / M_PI * acc;
    // residues of e^{-qk0} M(q) / (q(q-1)) crossed when the Bromwich contour
    // moves left from Re q > 1
    double residue = q_tilde > 1.0 ? 0.0 : (q_tilde > 0.0 ? 1.0 : 1.0 - std::exp(k0));
    PriceResult out;
    out.price = contour_value + residue;
    out.tail = last;
    out.accuracy_warning = last > 1e-9;
    return out;
}

// H = 0 limit (alpha = 1/2): Edgeworth-regime put prices and implied
// Bachelier vols for the limiting variable Z with mgf exp(V0 Lambda(p)).
struct H0Config {
    QuadratureSpec quad = {1600, 40.0};
    double damping = 0.0;  // 0: auto, min(1, 0.4 p+^0)
    std::size_t n_steps = 256;       // Adams fallback grid
    std::size_t series_terms = 10;   // small-t series, used within its radius
};

// Lambda(p) = I^{1/2} phi(p, .)(1): series within its empirical radius,
// complex Adams solve beyond it.
inline std::complex<double> h0_lambda(const ModelParams& params, std::complex<double> p,
                                      std::size_t series_terms, std::size_t n_steps) {
    auto rhs = RiccatiRhs<std::complex<double>>::driftless(p, params);
    auto series = solve_series(rhs, 0.5, std::max<std::size_t>(series_terms, 30));
    if (!series.truncated && series.radius > 2.0) {
        double a = 0.5;
        std::complex<double> acc{};
        for (std::size_t n = 1; n <= series.coeffs.size(); ++n)
            acc += series.coeffs[n - 1] * gamma_fn(a * n + 1.0) / gamma_fn(2.0 + a * (n - 1.0));
        return acc;
    }
    FracGrid grid(1.0, n_steps);
    auto sol = solve_adams(rhs, 0.5, grid);
    if (sol.exploded) throw NumericalFailure("h0_lambda: solution exploded before t = 1", sol.n_valid);
    return frac_integral_at_end(sol.values, grid, 0.5);
}

class H0Pricer {
  public:
    explicit H0Pricer(const ModelParams& params, const H0Config& cfg = {})
        : params_(params), cfg_(cfg), gl_(cfg.quad.n_points, 0.0, cfg.quad.u_max) {
        params_.validate();
        if (params_.alpha != 0.5)
            throw std::invalid_argument("H0Pricer: requires alpha = 1/2 (H = 0)");
        if (cfg_.damping > 0.0) {
            damping_ = cfg_.damping;
        } else {
            double hint = 10.0 / (params_.nu * params_.nu);
            double t_star =
                explosion_time(RiccatiRhs<double>::driftless(1.0, params_), 0.5, hint);
            damping_ = std::min(1.0, 0.4 * std::sqrt(t_star));
        }
    }

    // M_Z(p) = exp(V0 Lambda(p)), analytic in the pre-explosion strip.
    std::complex<double> mgf_z(std::complex<double> p) const {
        return std::exp(params_.v0 * h0_lambda(params_, p, cfg_.series_terms, cfg_.n_steps));
    }

    // E(x - Z)^+ via the damped Bromwich representation of the payoff.
    PriceResult put(double x) const {
        int side = x >= 0.0 ? +1 : -1;  // contour side: Re p = side * damping
        const auto& vals = contour_values(side);
        double acc = 0.0;
        double last = 0.0;
        double c = side * damping_;
        for (std::size_t j = 0; j < gl_.x.size(); ++j) {
            std::complex<double> p(c, gl_.x[j]);
            std::complex<double> integrand = std::exp(p * x) * vals[j] / (p * p);
            double re = std::real(integrand);
            acc += gl_.w[j] * re;
            last = std::abs(integrand);
        }
        PriceResult out;
        out.price = acc / M_PI;
        if (side < 0) out.price += x;  // contour left of 0 yields the call; add parity term
        out.tail = last;
        out.accuracy_warning = last > 1e-9;
        return out;
    }

    // Bachelier-implied vol of the limiting put.
    double smile(double x) const { return bachelier_inverse(x, put(x).price); }

    double damping() const { return damping_; }

  private:
    // cached M_Z(-p) on the two contours p = +-damping + iu
    const std::vector<std::complex<double>>& contour_values(int side) const {
        auto& cache = side > 0 ? plus_ : minus_;
        if (cache.empty()) {
            cache.reserve(gl_.x.size());
            double c = side * damping_;
            for (double u : gl_.x) {
                std::complex<double> p(c, u);
                std::complex<double> lam =
                    h0_lambda(params_, -p, cfg_.series_terms, cfg_.n_steps);
                cache.push_back(std::exp(params_.v0 * lam));
            }
        }
        return cache;
    }

    ModelParams params_;
    H0Config cfg_;
    GaussLegendre gl_;
    double damping_ = 1.0;
    mutable std::vector<std::complex<double>> plus_;
    mutable std::vector<std::complex<double>> minus_;
};

}  // namespace rheston
