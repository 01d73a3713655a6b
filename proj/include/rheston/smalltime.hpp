#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "rheston/mgf.hpp"
#include "rheston/riccati.hpp"

namespace rheston {

// Critical moments p+- = +-(T*(+-1))^a from the driftless explosion times.
struct CriticalMoments {
    double p_minus = 0.0;
    double p_plus = 0.0;
    double t_star_plus = 0.0;
    double t_star_minus = 0.0;
};

inline CriticalMoments critical_moments(const ModelParams& params) {
    params.validate();
    double hint = 10.0 / (params.nu * params.nu);
    CriticalMoments cm;
    cm.t_star_plus =
        explosion_time(RiccatiRhs<double>::driftless(1.0, params), params.alpha, hint);
    cm.t_star_minus =
        explosion_time(RiccatiRhs<double>::driftless(-1.0, params), params.alpha, hint);
    cm.p_plus = std::pow(cm.t_star_plus, params.alpha);
    cm.p_minus = -std::pow(cm.t_star_minus, params.alpha);
    return cm;
}

struct RatePoint {
    double rate = 0.0;    // I(x)
    double p_star = 0.0;  // maximizer of p x - Lambda_bar(p)
};

namespace detail {

// Golden-section maximization of a concave objective on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Fenchel-Legendre transform I(x) = sup_p (p x - Lambda_bar(p)) over a
// user-supplied Lambda_bar evaluator on (p_minus, p_plus).
inline RatePoint rate_function(const std::function<double(double)>& lambda_bar_fn, double p_minus,
                               double p_plus, double x) {
    if (x == 0.0) return {0.0, 0.0};
    auto objective = [&](double p) {
        double lb = lambda_bar_fn(p);
        if (!std::isfinite(lb)) return -std::numeric_limits<double>::infinity();
        return p * x - lb;
    };
    double lo = x > 0.0 ? 0.0 : p_minus * (1.0 - 1e-12);
    double hi = x > 0.0 ? p_plus * (1.0 - 1e-12) : 0.0;
    double p_star = detail::golden_max(objective, lo, hi, 1e-10);
    return {objective(p_star), p_star};
}

inline RatePoint rate_function(const LambdaTable& table, const ModelParams& params, double x) {
    double pp = std::pow(table.t_star_plus, table.alpha);
    double pm = -std::pow(table.t_star_minus, table.alpha);
    return rate_function([&](double p) { return lambda_bar(table, params.v0, p); }, pm, pp, x);
}

// Leading-order asymptotic smile sigma_hat(x) = |x| / sqrt(2 I(x)).
inline double asymptotic_smile(const RatePoint& rate, double x, double v0) {
    if (x == 0.0) return std::sqrt(v0);
    if (!(rate.rate > 0.0))
        throw std::domain_error("asymptotic_smile: degenerate rate I(x) = 0 for x != 0");
    return std::fabs(x) / std::sqrt(2.0 * rate.rate);
}

// Level/skew/convexity of the short-end smile series in x.
struct SmileSeries {
    double sigma0 = 0.0;
    double skew = 0.0;
    double convexity = 0.0;

    double operator()(double x) const { return sigma0 + skew * x + convexity * x * x; }
};

inline SmileSeries smile_series_coeffs(const ModelParams& params) {
    params.validate();
    const double a = params.alpha, nu = params.nu, rho = params.rho, v0 = params.v0;
    SmileSeries s;
    s.sigma0 = std::sqrt(v0);
    s.skew = rho * nu / (2.0 * gamma_fn(2.0 + a) * std::sqrt(v0));
    double g1a = gamma_fn(1.0 + a);
    double g2a = gamma_fn(2.0 + a);
    double g12a = gamma_fn(1.0 + 2.0 * a);
    double g22a = gamma_fn(2.0 + 2.0 * a);
    s.convexity = nu * nu *
                  (g12a + 2.0 * rho * rho * g1a * g1a * (2.0 - 3.0 * g22a / (g2a * g2a))) /
                  (8.0 * std::pow(v0, 1.5) * g1a * g1a * g22a);
    return s;
}

// Smile evaluator: series quadratic near x = 0, numeric FL transform of the
// truncated Lambda_bar series elsewhere (15 terms by default).
class SmallTimeSmile {
  public:
    explicit SmallTimeSmile(const ModelParams& params, std::size_t n_terms = 15,
                            double crossover = 0.01)
        : params_(params), n_terms_(n_terms), crossover_(crossover),
          series_(smile_series_coeffs(params)) {
        params_.validate();
        // ratio-test radius of the Lambda_bar series in p, 0.9 safety factor
        auto psi = solve_series(RiccatiRhs<double>::driftless(1.0, params_), params_.alpha, 60);
        std::size_t n = psi.coeffs.size();
        double r = std::fabs(psi.coeffs[n - 2] / psi.coeffs[n - 1]);
        p_max_ = 0.9 * r;
    }

    RatePoint rate(double x) const {
        return rate_function([&](double p) { return lambda_bar_series(params_, p, n_terms_); },
                             -p_max_, p_max_, x);
    }

    double operator()(double x) const {
        if (std::fabs(x) <= crossover_) return series_(x);
        return asymptotic_smile(rate(x), x, params_.v0);
    }

    double p_limit() const { return p_max_; }
    const ModelParams& params() const { return params_; }
    std::size_t n_terms() const { return n_terms_; }

  private:
    ModelParams params_;
    std::size_t n_terms_;
    double crossover_;
    SmileSeries series_;
    double p_max_ = 0.0;
};

// Saddlepoint quantities for the higher-order call expansion.
struct SaddleData {
    double p_star = 0.0;
    double rate = 0.0;            // I(x)
    double lambda_bar_dd = 0.0;   // Lambda_bar''(p*)
    double amplitude = 0.0;       // A(x) = 1/((p*)^2 sqrt(Lambda_bar''))
    double g_correction = 0.0;    // G(k*) = V0 I^{1-a} psi1(p*, .)(1)
    double f1_correction = 0.0;   // F1(k*) = I^1 psi(p*, .)(1)
    double sigma1 = 0.0;          // formal higher-order vol correction
};

inline SaddleData saddle_data(const ModelParams& params, double x, std::size_t n_terms = 15,
                              std::size_t n_steps = 1000) {
    if (x == 0.0) throw std::domain_error("saddle_data: x must be nonzero");
    SmallTimeSmile smile(params, n_terms);
    RatePoint rp = smile.rate(x);
    SaddleData sd;
    sd.p_star = rp.p_star;
    sd.rate = rp.rate;

    auto lb = [&](double p) { return lambda_bar_series(params, p, n_terms); };
    double h = 1e-4 * smile.p_limit();
    sd.lambda_bar_dd = (lb(rp.p_star + h) - 2.0 * lb(rp.p_star) + lb(rp.p_star - h)) / (h * h);
    if (!(sd.lambda_bar_dd > 0.0))
        throw NumericalFailure("saddle_data: nonpositive Lambda_bar'' violates convexity", 0);
    sd.amplitude = 1.0 / (rp.p_star * rp.p_star * std::sqrt(sd.lambda_bar_dd));

    FracGrid grid(1.0, n_steps);
    auto psi = solve_adams(RiccatiRhs<double>::driftless(rp.p_star, params), params.alpha, grid);
    if (psi.exploded)
        throw NumericalFailure("saddle_data: psi exploded before t = 1", psi.n_valid);
    auto psi1 = solve_psi1(psi, params, rp.p_star);
    sd.g_correction =
        params.v0 * frac_integral_at_end(psi1.values, grid, 1.0 - params.alpha);
    sd.f1_correction = frac_integral_at_end(psi.values, grid, 1.0);

    double a1 = 2.0 * sd.amplitude * std::pow(sd.rate, 1.5) / std::fabs(x);
    sd.sigma1 = x * x * std::log(a1) / (2.0 * sd.rate * sd.rate);
    return sd;
}

// Moderate-deviations Gaussian rate x^2/(2 V0), valid for beta in (2H/3, H).
inline double moderate_rate(const ModelParams& params, double x, double beta) {
    params.validate();
    double H = params.hurst();
    if (!(H > 0.0 && H < 0.5))
        throw std::domain_error("moderate_rate: requires H in (0, 1/2)");
    if (!(beta > 2.0 * H / 3.0 && beta < H))
        throw std::domain_error("moderate_rate: beta must lie in (2H/3, H) = (" +
                                std::to_string(2.0 * H / 3.0) + ", " + std::to_string(H) + ")");
    return x * x / (2.0 * params.v0);
}

}  // namespace rheston
