#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rheston/riccati.hpp"

namespace rheston {

// log E(e^{p X_t}) = V0 I^{1-a} f(p,t) + lambda theta I^1 f(p,t).
template <typename T>
struct MgfValue {
    T log_mgf{};
    T p{};
    double t = 0.0;
    bool finite = true;
};

template <typename T>
MgfValue<T> log_mgf(const ModelParams& params, const T& p, double t, std::size_t n_steps = 512) {
    params.validate();
    if (!(t > 0.0)) throw std::domain_error("log_mgf: t must be positive");
    if (n_steps < 64) throw std::domain_error("log_mgf: n_steps must be >= 64");
    MgfValue<T> out;
    out.p = p;
    out.t = t;
    FracGrid grid(t, n_steps);
    auto sol = solve_adams(RiccatiRhs<T>::full(p, params), params.alpha, grid);
    if (sol.exploded) {
        out.finite = false;
        out.log_mgf = T(std::numeric_limits<double>::infinity());
        return out;
    }
    T i_frac = (params.alpha == 1.0) ? sol.values.back()
                                     : frac_integral_at_end(sol.values, grid, 1.0 - params.alpha);
    T i_one = frac_integral_at_end(sol.values, grid, 1.0);
    out.log_mgf = params.v0 * i_frac + params.lambda * params.theta * i_one;
    return out;
}

namespace detail {

// Fritsch-Carlson monotone cubic interpolant on a uniform grid.
struct Pchip {
    double h = 0.0;
    std::vector<double> y;
    std::vector<double> d;  // node slopes

    void build(double step, const std::vector<double>& vals) {
        h = step;
        y = vals;
        std::size_t n = y.size();
        d.assign(n, 0.0);
        if (n < 2) return;
        std::vector<double> s(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) s[i] = (y[i + 1] - y[i]) / h;
        d[0] = s[0];
        d[n - 1] = s[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (s[i - 1] * s[i] <= 0.0)
                d[i] = 0.0;
            else
                d[i] = 2.0 * s[i - 1] * s[i] / (s[i - 1] + s[i]);  // harmonic mean
        }
    }

    double operator()(double x) const {
        std::size_t n = y.size();
        if (x <= 0.0) return y.front();
        std::size_t i = static_cast<std::size_t>(x / h);
        if (i >= n - 1) return y.back();
        double u = (x - double(i) * h) / h;
        double u2 = u * u, u3 = u2 * u;
        double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
        double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        return h00 * y[i] + h * h10 * d[i] + h01 * y[i + 1] + h * h11 * d[i + 1];
    }
};

}  // namespace detail

// Tabulated Lambda(sigma, s) = I^{1-a} psi(sigma, .)(s) for sigma = +/-1 on
// [0, T*(sigma)), with a fitted wing law beyond the resolved range.
struct LambdaTable {
    double alpha = 0.75;
    double t_star_plus = 0.0;
    double t_star_minus = 0.0;
    double s_end_plus = 0.0;
    double s_end_minus = 0.0;
    double wing_c_plus = 0.0;   // Lambda ~ C/(T* - s)^{2a-1}, fitted
    double wing_c_minus = 0.0;
    detail::Pchip interp_plus;
    detail::Pchip interp_minus;

    double t_star(int sign) const { return sign > 0 ? t_star_plus : t_star_minus; }

    // Lambda(sigma, s); +infinity at and beyond the explosion time.
    double lambda(int sign, double s) const {
        double ts = t_star(sign);
        double s_end = sign > 0 ? s_end_plus : s_end_minus;
        if (s <= 0.0) return 0.0;
        // divergence marker; the tolerance absorbs round trips through s^alpha
        if (s >= ts * (1.0 - 1e-12)) return std::numeric_limits<double>::infinity();
        if (s <= s_end) return sign > 0 ? interp_plus(s) : interp_minus(s);
        double c = sign > 0 ? wing_c_plus : wing_c_minus;
        return c / std::pow(ts - s, 2.0 * alpha - 1.0);
    }

    void to_csv(const std::string& path, std::size_t n_rows = 400) const {
        std::ofstream out(path);
        out << "s,lambda_plus,lambda_minus\n";
        double smax = std::min(s_end_plus, s_end_minus);
        for (std::size_t i = 0; i <= n_rows; ++i) {
            double s = smax * double(i) / double(n_rows);
            out << s << ',' << lambda(1, s) << ',' << lambda(-1, s) << '\n';
        }
    }
};

namespace detail {

inline void build_branch(const ModelParams& params, int sign, std::size_t n_steps, double& t_star,
                         double& s_end, double& wing_c, Pchip& interp) {
    auto rhs = RiccatiRhs<double>::driftless(double(sign), params);
    double hint = 10.0 / (params.nu * params.nu);
    t_star = explosion_time(rhs, params.alpha, hint);
    if (!std::isfinite(t_star))
        throw std::domain_error("build_lambda_table: no explosion bracket found");
    s_end = 0.995 * t_star;
    FracGrid grid(s_end, n_steps);
    auto sol = solve_adams(rhs, params.alpha, grid);
    if (sol.exploded) {
        // discrete blow-up slightly before the bisected T*; shrink and retry
        s_end = 0.9 * sol.t_lo;
        grid = FracGrid(s_end, n_steps);
        sol = solve_adams(rhs, params.alpha, grid);
        if (sol.exploded) throw NumericalFailure("build_lambda_table: unstable branch", sol.n_valid);
    }
    std::vector<double> lam = frac_integral(sol.values, grid, 1.0 - params.alpha);
    interp.build(grid.step(), lam);
    // wing constant from the last resolved decade of the table
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = n_steps - n_steps / 10; k <= n_steps; ++k) {
        acc += lam[k] * std::pow(t_star - grid.node(k), 2.0 * params.alpha - 1.0);
        ++cnt;
    }
    wing_c = acc / double(cnt);
}

}  // namespace detail

// Two Adams solves (p = +/-1) up to the explosion brackets, with I^{1-a}
// applied by product quadrature. lambda = 0 is assumed (small-time regime).
inline LambdaTable build_lambda_table(const ModelParams& params, std::size_t n_steps = 6000) {
    params.validate();
    LambdaTable t;
    t.alpha = params.alpha;
    detail::build_branch(params, +1, n_steps, t.t_star_plus, t.s_end_plus, t.wing_c_plus,
                         t.interp_plus);
    detail::build_branch(params, -1, n_steps, t.t_star_minus, t.s_end_minus, t.wing_c_minus,
                         t.interp_minus);
    return t;
}

// Scaling-reduced limit: Lambda_bar(p) = V0 |p|^{2H/a} Lambda(sgn p, |p|^{1/a}).
inline double lambda_bar(const LambdaTable& table, double v0, double p) {
    if (p == 0.0) return 0.0;
    int sign = p > 0.0 ? 1 : -1;
    double ap = std::fabs(p);
    double a = table.alpha;
    double s = std::pow(ap, 1.0 / a);
    double lam = table.lambda(sign, s);
    if (!std::isfinite(lam)) return std::numeric_limits<double>::infinity();
    return v0 * std::pow(ap, (2.0 * a - 1.0) / a) * lam;
}

// Series route: Lambda_bar(p) = V0 sum_n a_n(p) Gamma(a n + 1)/Gamma(2 + a(n-1))
// from the fractional power series of the driftless Riccati solution.
inline double lambda_bar_series(const ModelParams& params, double p, std::size_t n_terms = 15) {
    if (p == 0.0) return 0.0;
    auto series = solve_series(RiccatiRhs<double>::driftless(p, params), params.alpha, n_terms);
    double a = params.alpha;
    double acc = 0.0;
    for (std::size_t n = 1; n <= series.coeffs.size(); ++n)
        acc += series.coeffs[n - 1] * gamma_fn(a * n + 1.0) / gamma_fn(2.0 + a * (n - 1.0));
    return params.v0 * acc;
}

}  // namespace rheston
