#pragma once

#include <quadmath.h>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rheston/grid.hpp"

namespace rheston {

// Raised when a special-function evaluation cannot reach the requested
// tolerance; carries the best estimate achieved.
struct AccuracyError : std::runtime_error {
    double achieved;
    AccuracyError(const std::string& msg, double achieved_)
        : std::runtime_error(msg), achieved(achieved_) {}
};

namespace detail {

// Spouge's approximation in quad precision, a = 40 gives ~ 32 digits.
// Valid for x > 0.
inline __float128 gamma_q(__float128 x) {
    constexpr int a = 40;
    static const std::vector<__float128> c = [] {
        std::vector<__float128> v(a);
        v[0] = 0;  // unused
        __float128 fact = 1;
        for (int k = 1; k < a; ++k) {
            __float128 ak = __float128(a - k);
            // c_k = (-1)^{k-1}/(k-1)! * (a-k)^{k-1/2} e^{a-k}
            __float128 t = powq(ak, __float128(k) - 0.5Q) * expq(ak) / fact;
            v[k] = (k % 2 == 1) ? t : -t;
            fact *= __float128(k);
        }
        return v;
    }();
    const __float128 sqrt2pi = 2.506628274631000502415765284811045253Q;
    __float128 z = x - 1;
    __float128 acc = sqrt2pi;
    for (int k = 1; k < a; ++k) acc += c[k] / (z + __float128(k));
    return powq(z + __float128(a), z + 0.5Q) * expq(-(z + __float128(a))) * acc;
}

}  // namespace detail

// Gamma function via Lanczos (g = 7) with reflection for x < 0.5.
inline double gamma_fn(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw std::domain_error("gamma_fn: pole at non-positive integer");
    static const double g[9] = {
        0.99999999999980993,    676.5203681218851,    -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,  12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return M_PI / (std::sin(M_PI * x) * gamma_fn(1.0 - x));
    }
    double z = x - 1.0;
    double a = g[0];
    for (int i = 1; i < 9; ++i) a += g[i] / (z + i);
    double t = z + 7.5;
    return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

namespace detail {

// 1/Gamma(w) for any real w (entire function).
inline double rgamma(double w) {
    if (w > 0.5) return 1.0 / gamma_fn(w);
    // 1/Gamma(w) = Gamma(1-w) sin(pi w) / pi
    return gamma_fn(1.0 - w) * std::sin(M_PI * w) / M_PI;
}

// Asymptotic expansion for z << 0:  E_{a,b}(z) = -sum_{k>=1} z^{-k}/Gamma(b-ak).
// Truncated at the smallest term; returns false if the achieved error
// estimate exceeds tol * |sum|.
inline bool ml_asymptotic(double a, double b, double z, double tol, double& out) {
    double sum = 0.0;
    double zinv = 1.0 / z;
    double zp = zinv;
    double prev = std::numeric_limits<double>::infinity();
    double smallest = prev;
    for (int k = 1; k <= 300; ++k) {
        double term = zp * rgamma(b - a * k);
        double mag = std::fabs(term);
        zp *= zinv;
        if (mag == 0.0) continue;  // Gamma pole: term vanishes, keep going
        if (mag > prev && k > 2) break;  // divergent tail reached
        sum -= term;
        prev = mag;
        if (mag < smallest) smallest = mag;
        if (mag < 1e-18 * std::fabs(sum)) break;
    }
    out = sum;
    // truncation error of the optimally-truncated divergent series
    double scale = std::max(std::fabs(sum), 1e-300);
    return smallest / scale <= tol;
}

// Power series in quad precision. Handles the alternating cancellation for
// moderately negative z. Returns false if cancellation exhausts quad eps.
inline bool ml_series(double a, double b, double z, double tol, double& out) {
    __float128 sum = 0;
    __float128 zq = z;
    __float128 zp = 1;
    __float128 max_term = 0;
    const __float128 eps_q = 1e-33Q;
    for (int n = 0; n <= 2000; ++n) {
        __float128 term = zp / gamma_q(__float128(a) * n + __float128(b));
        sum += term;
        __float128 mag = fabsq(term);
        if (mag > max_term) max_term = mag;
        if (n > 4 && mag < eps_q * max_term) break;
        zp *= zq;
    }
    out = static_cast<double>(sum);
    // gamma_q is good to ~1e-19 relative at large arguments (Spouge coefficient
    // cancellation), which bounds the effective precision of each term.
    double cancel_err = static_cast<double>(max_term) * 1e-19;
    double scale = std::max(std::fabs(out), 1e-300);
    return cancel_err / scale <= tol;
}

}  // namespace detail

// Legendre nodes/weights on [lo, hi] by Newton iteration on P_n.
inline void gauss_legendre(std::size_t n, double lo, double hi, std::vector<double>& x,
                           std::vector<double>& w) {
    if (n < 2) throw std::domain_error("gauss_legendre: need >= 2 points");
    x.resize(n);
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
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
        x[i] = 0.5 * (hi - lo) * (-z) + 0.5 * (lo + hi);
        w[i] = (hi - lo) / ((1.0 - z * z) * pp * pp);
    }
}

namespace detail {

// Real-axis integral representation for z < 0, 0 < a < 1 (substitution
// u = v^m, m chosen so the u^{a-b} endpoint maps to an exact v^5, panel
// splits around the peak of the denominator at u^a = z cos(pi a)):
//   E_{a,b}(z) = (1/pi) int_0^inf u^{a-b} e^{-u}
//                [u^a sin(pi(1-b)) - z sin(pi(1-b+a))]
//                / ((u^a - z cos(pi a))^2 + z^2 sin^2(pi a)) du.
inline double ml_negative_integral(double a, double b, double z, std::size_t n_points) {
    const double s1 = std::sin(M_PI * (1.0 - b));
    const double s2 = std::sin(M_PI * (1.0 - b + a));
    const double c = std::cos(M_PI * a);
    const double sa = std::sin(M_PI * a);
    const double ucut = 60.0;
    const double m = 6.0 / (1.0 + a - b);

    auto integrand = [&](double v) {
        double u = std::pow(v, m);
        double ua = std::pow(u, a);
        double num = std::pow(u, a - b) * std::exp(-u) * (ua * s1 - z * s2);
        double den = (ua - z * c) * (ua - z * c) + z * z * sa * sa;
        return m * std::pow(v, m - 1.0) * num / den / M_PI;
    };

    std::vector<double> cuts = {0.0};
    if (z * c > 0.0) {
        double u0 = std::pow(z * c, 1.0 / a);
        if (u0 < ucut) {
            double du = std::fabs(z) * sa / (a * std::pow(u0, a - 1.0));
            for (double k : {-300.0, -100.0, -30.0, -10.0, -3.0, -1.0,
                             1.0, 3.0, 10.0, 30.0, 100.0, 300.0}) {
                double uu = u0 + k * du;
                if (uu > 0.0 && uu < ucut) cuts.push_back(std::pow(uu, 1.0 / m));
            }
        }
    }
    cuts.push_back(std::pow(ucut, 1.0 / m));
    std::sort(cuts.begin(), cuts.end());

    double acc = 0.0;
    std::vector<double> x, w;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-300) continue;
        gauss_legendre(n_points, cuts[i], cuts[i + 1], x, w);
        for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * integrand(x[j]);
    }
    return acc;
}

}  // namespace detail

// Mittag-Leffler function E_{a,b}(z) for real z, a in (0,2].
// Power series (quad precision) for z >= -2 and for a >= 1; real-axis
// integral representation for a in (0,1), z < -2 (spectrally accurate,
// immune to the alternating-series cancellation).
inline double mittag_leffler(double a, double b, double z) {
    if (!(a > 0.0 && a <= 2.0))
        throw std::domain_error("mittag_leffler: order a must be in (0,2]");
    if (z == 0.0) return detail::rgamma(b);
    if (a == 1.0 && b == 1.0) return std::exp(z);
    if (a == 1.0 && b == 2.0) return std::expm1(z) / z;
    const double tol = 1e-11;
    double val;
    if (z < -2.0 && a < 1.0) {
        double coarse = detail::ml_negative_integral(a, b, z, 100);
        val = detail::ml_negative_integral(a, b, z, 160);
        double scale = std::max(std::fabs(val), 1e-300);
        if (std::fabs(val - coarse) / scale > 1e-9)  // coarse-grid error bound
            throw AccuracyError("mittag_leffler: quadrature did not converge", val);
        return val;
    }
    if (detail::ml_series(a, b, z, tol, val)) return val;
    if (z < 0.0 && detail::ml_asymptotic(a, b, z, tol, val)) return val;
    throw AccuracyError("mittag_leffler: requested tolerance unreachable", val);
}

namespace detail {

// Product-integration weights for the piecewise-linear scheme:
//   I^r g(t_n) = h^r/Gamma(r+2) * [ a_{0,n} g_0 + sum_j a_{j,n} g_j + g_n ].
inline double pi_weight(std::size_t j, std::size_t n, double r) {
    double nn = static_cast<double>(n);
    if (j == 0) return std::pow(nn - 1.0, r + 1.0) - (nn - 1.0 - r) * std::pow(nn, r);
    if (j == n) return 1.0;
    double m = nn - static_cast<double>(j);
    return std::pow(m + 1.0, r + 1.0) + std::pow(m - 1.0, r + 1.0) - 2.0 * std::pow(m, r + 1.0);
}

}  // namespace detail

// Riemann-Liouville fractional integral I^r of grid samples, returned at
// every node. Product integration against the linear interpolant; O(h^2).
template <typename T>
std::vector<T> frac_integral(const std::vector<T>& samples, const FracGrid& grid, double r) {
    if (samples.size() != grid.size())
        throw std::domain_error("frac_integral: samples do not match grid");
    if (samples.empty()) throw std::domain_error("frac_integral: empty grid");
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("frac_integral: order must be in (0,1]");
    const double h = grid.step();
    const double c = std::pow(h, r) / gamma_fn(r + 2.0);
    std::vector<T> out(samples.size());
    out[0] = T{};
    for (std::size_t n = 1; n < samples.size(); ++n) {
        T acc{};
        for (std::size_t j = 0; j <= n; ++j)
            acc += detail::pi_weight(j, n, r) * samples[j];
        out[n] = c * acc;
    }
    return out;
}

// Fractional integral evaluated at the last grid node only.
template <typename T>
T frac_integral_at_end(const std::vector<T>& samples, const FracGrid& grid, double r) {
    if (samples.size() != grid.size())
        throw std::domain_error("frac_integral_at_end: samples do not match grid");
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("frac_integral_at_end: order must be in (0,1]");
    const double h = grid.step();
    const double c = std::pow(h, r) / gamma_fn(r + 2.0);
    const std::size_t n = grid.n_steps;
    T acc{};
    for (std::size_t j = 0; j <= n; ++j)
        acc += detail::pi_weight(j, n, r) * samples[j];
    return c * acc;
}

// Riemann-Liouville fractional derivative D^r g = d/dt I^{1-r} g, the time
// derivative taken by central differences (one-sided at the endpoints).
inline std::vector<double> frac_derivative(const std::vector<double>& samples,
                                           const FracGrid& grid, double r) {
    if (samples.size() != grid.size())
        throw std::domain_error("frac_derivative: samples do not match grid");
    if (grid.size() < 3) throw std::domain_error("frac_derivative: need >= 3 nodes");
    if (!(r > 0.0 && r < 1.0))
        throw std::domain_error("frac_derivative: order must be in (0,1)");
    std::vector<double> I = frac_integral(samples, grid, 1.0 - r);
    const double h = grid.step();
    std::vector<double> out(samples.size());
    const std::size_t N = samples.size() - 1;
    out[0] = (-3.0 * I[0] + 4.0 * I[1] - I[2]) / (2.0 * h);
    for (std::size_t k = 1; k < N; ++k) out[k] = (I[k + 1] - I[k - 1]) / (2.0 * h);
    out[N] = (3.0 * I[N] - 4.0 * I[N - 1] + I[N - 2]) / (2.0 * h);
    return out;
}

}  // namespace rheston
