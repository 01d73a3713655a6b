#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rheston/grid.hpp"
#include "rheston/model.hpp"
#include "rheston/special.hpp"

namespace rheston {

// Right-hand side G(w) = c0 + c1 w + c2 w^2 of the fractional Riccati
// equation D^a f = G(f), f(0) = 0.
template <typename T>
struct RiccatiRhs {
    T c0{};
    T c1{};
    T c2{};

    T operator()(const T& w) const { return c0 + w * (c1 + c2 * w); }

    // Log-mgf equation: c0 = (p^2 - p)/2, c1 = p rho nu - lambda.
    static RiccatiRhs full(const T& p, const ModelParams& params) {
        return {0.5 * (p * p - p), p * params.rho * params.nu - params.lambda,
                T(0.5 * params.nu * params.nu)};
    }

    // Driftless small-time equation: c0 = p^2/2, c1 = p rho nu.
    static RiccatiRhs driftless(const T& p, const ModelParams& params) {
        return {0.5 * p * p, p * params.rho * params.nu, T(0.5 * params.nu * params.nu)};
    }
};

struct NumericalFailure : std::runtime_error {
    std::size_t last_good_node;
    NumericalFailure(const std::string& msg, std::size_t node)
        : std::runtime_error(msg), last_good_node(node) {}
};

// Discretized VIE solution with blow-up metadata. When exploded, values are
// valid on nodes [0, n_valid) and (t_lo, t_hi) brackets the blow-up.
template <typename T>
struct VieSolution {
    FracGrid grid;
    std::vector<T> values;
    std::size_t n_valid = 0;  // number of valid nodes
    bool exploded = false;
    double t_lo = 0.0;
    double t_hi = 0.0;

    // Value at the final grid node; throws if the solve exploded earlier.
    T at_end() const {
        if (exploded) throw std::domain_error("VieSolution: solution exploded before t_max");
        return values.back();
    }
};

inline constexpr double kBlowupThreshold = 1e8;

namespace detail {

// Shared weight tables for the fractional Adams scheme on a uniform grid.
struct AdamsWeights {
    std::vector<double> bpow;  // m^alpha
    std::vector<double> apow;  // m^{alpha+1}
    double c_pred, c_corr, alpha;

    AdamsWeights(double a, std::size_t n_steps, double h) : alpha(a) {
        bpow.resize(n_steps + 2);
        apow.resize(n_steps + 2);
        for (std::size_t m = 0; m < bpow.size(); ++m) {
            bpow[m] = std::pow(double(m), a);
            apow[m] = std::pow(double(m), a + 1.0);
        }
        c_pred = std::pow(h, a) / gamma_fn(a + 1.0);
        c_corr = std::pow(h, a) / gamma_fn(a + 2.0);
    }

    double pred(std::size_t j, std::size_t np1) const { return bpow[np1 - j] - bpow[np1 - 1 - j]; }

    double corr(std::size_t j, std::size_t np1) const {
        std::size_t n = np1 - 1;
        if (j == 0) return apow[n] - (double(n) - alpha) * bpow[np1];
        std::size_t m = n - j;
        return apow[m + 2] + apow[m] - 2.0 * apow[m + 1];
    }
};

template <typename T>
bool magnitude_exceeds(const T& v, double m) {
    using std::abs;
    double a = std::abs(v);
    return !(a == a) || a > m;  // NaN or beyond threshold
}

// Fractional Adams predictor-corrector (PECE, one corrector sweep) for
// D^a f = G(t_k, f), f(0) = 0, where G may depend on the node index
// (time-dependent coefficients reuse this path).
template <typename T, typename Rhs>
VieSolution<T> adams_pece(Rhs&& g, double alpha, const FracGrid& grid) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("solve_adams: alpha must be in (0,1]");
    const std::size_t N = grid.n_steps;
    const double h = grid.step();
    AdamsWeights w(alpha, N, h);

    VieSolution<T> sol;
    sol.grid = grid;
    sol.values.assign(N + 1, T{});
    std::vector<T> gv(N + 1);
    gv[0] = g(0, T{});
    sol.n_valid = 1;

    for (std::size_t np1 = 1; np1 <= N; ++np1) {
        T pred{};
        T corr{};
        for (std::size_t j = 0; j < np1; ++j) {
            pred += w.pred(j, np1) * gv[j];
            corr += w.corr(j, np1) * gv[j];
        }
        T fp = w.c_pred * pred;
        T f = w.c_corr * (corr + g(np1, fp));
        if (magnitude_exceeds(f, kBlowupThreshold) || magnitude_exceeds(fp, kBlowupThreshold)) {
            double prev = std::abs(sol.values[np1 - 1]);
            if (!(std::abs(f) == std::abs(f)) && prev < 1.0)
                throw NumericalFailure("solve_adams: NaN before blow-up threshold", np1 - 1);
            sol.exploded = true;
            sol.t_lo = grid.node(np1 - 1);
            sol.t_hi = grid.node(np1);
            for (std::size_t k = np1; k <= N; ++k)
                sol.values[k] = T(std::numeric_limits<double>::quiet_NaN());
            return sol;
        }
        sol.values[np1] = f;
        gv[np1] = g(np1, f);
        sol.n_valid = np1 + 1;
    }
    return sol;
}

}  // namespace detail

template <typename T>
VieSolution<T> solve_adams(const RiccatiRhs<T>& rhs, double alpha, const FracGrid& grid) {
    return detail::adams_pece<T>([&rhs](std::size_t, const T& w) { return rhs(w); }, alpha, grid);
}

// Fractional power series f(t) = sum_n a_n t^{a n} with a ratio-test radius
// estimate (0.9 safety factor).
template <typename T>
struct SeriesSolution {
    std::vector<T> coeffs;  // a_1 .. a_N
    double alpha = 0.75;
    double radius = 0.0;  // empirical radius of convergence in t
    bool truncated = false;

    T eval(double t) const {
        if (radius > 0.0 && t > radius)
            throw std::domain_error("SeriesSolution: t beyond empirical radius");
        double ta = std::pow(t, alpha);
        T acc{};
        double tp = ta;
        for (const T& a : coeffs) {
            acc += a * tp;
            tp *= ta;
        }
        return acc;
    }
};

template <typename T>
SeriesSolution<T> solve_series(const RiccatiRhs<T>& rhs, double alpha, std::size_t n_terms) {
    if (n_terms < 1 || n_terms > 200)
        throw std::domain_error("solve_series: n_terms must be in [1,200]");
    SeriesSolution<T> s;
    s.alpha = alpha;
    s.coeffs.resize(n_terms);
    s.coeffs[0] = rhs.c0 / gamma_fn(1.0 + alpha);
    for (std::size_t n = 1; n < n_terms; ++n) {
        T conv{};
        for (std::size_t k = 1; k + 1 <= n; ++k) conv += s.coeffs[k - 1] * s.coeffs[n - k - 1];
        T next = (rhs.c1 * s.coeffs[n - 1] + rhs.c2 * conv) *
                 (gamma_fn(alpha * n + 1.0) / gamma_fn(alpha * (n + 1) + 1.0));
        if (detail::magnitude_exceeds(next, 1e280)) {
            s.coeffs.resize(n);
            s.truncated = true;
            break;
        }
        s.coeffs[n] = next;
    }
    // ratio test on the trailing coefficients
    double r = 0.0;
    std::size_t n = s.coeffs.size();
    if (n >= 2) {
        double num = std::abs(s.coeffs[n - 2]);
        double den = std::abs(s.coeffs[n - 1]);
        if (den > 0.0 && num > 0.0) r = 0.9 * std::pow(num / den, 1.0 / alpha);
    }
    s.radius = r;
    return s;
}

// Linear correction VIE: D^a psi1 = -p/2 - lambda psi + (p rho nu + nu^2 psi(t)) psi1.
template <typename T>
VieSolution<T> solve_psi1(const VieSolution<T>& psi0, const ModelParams& params, const T& p) {
    if (psi0.exploded) throw std::domain_error("solve_psi1: psi0 exploded on the grid");
    const T half_p = 0.5 * p;
    const T lin = p * params.rho * params.nu;
    const double nu2 = params.nu * params.nu;
    const double lambda = params.lambda;
    auto g = [&](std::size_t k, const T& w) {
        const T& psi = psi0.values[k];
        return -half_p - lambda * psi + (lin + nu2 * psi) * w;
    };
    return detail::adams_pece<T>(g, params.alpha, psi0.grid);
}

// Series coefficients b_n for psi1 given the psi series.
template <typename T>
SeriesSolution<T> psi1_series(const SeriesSolution<T>& psi, const ModelParams& params, const T& p,
                              std::size_t n_terms) {
    const double alpha = psi.alpha;
    SeriesSolution<T> s;
    s.alpha = alpha;
    s.coeffs.resize(n_terms);
    s.coeffs[0] = -0.5 * p / gamma_fn(1.0 + alpha);
    const T lin = p * params.rho * params.nu;
    const double nu2 = params.nu * params.nu;
    for (std::size_t n = 1; n < n_terms; ++n) {
        T conv{};
        for (std::size_t k = 1; k + 1 <= n; ++k) conv += psi.coeffs[k - 1] * s.coeffs[n - k - 1];
        T rhs = lin * s.coeffs[n - 1] + nu2 * conv;
        if (n - 1 < psi.coeffs.size()) rhs -= params.lambda * psi.coeffs[n - 1];
        s.coeffs[n] = rhs * (gamma_fn(alpha * n + 1.0) / gamma_fn(alpha * (n + 1) + 1.0));
    }
    s.radius = psi.radius;
    return s;
}

// Explosion time T* of a real Riccati solution by bracketing plus bisection
// with restarted Adams solves. Returns +infinity when no blow-up is found
// by 10 * t_hint.
inline double explosion_time(const RiccatiRhs<double>& rhs, double alpha, double t_hint,
                             std::size_t n_steps = 2000) {
    if (!(t_hint > 0.0)) throw std::domain_error("explosion_time: t_hint must be positive");
    double span = t_hint;
    VieSolution<double> sol;
    for (;;) {
        sol = solve_adams(rhs, alpha, FracGrid(span, n_steps));
        if (sol.exploded) break;
        span *= 2.0;
        if (span > 10.0 * t_hint) return std::numeric_limits<double>::infinity();
    }
    double lo = sol.t_lo, hi = sol.t_hi;
    while (hi - lo > 1e-4 * hi) {
        double mid = 0.5 * (lo + hi);
        VieSolution<double> trial = solve_adams(rhs, alpha, FracGrid(mid, n_steps));
        if (trial.exploded)
            hi = trial.t_hi;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rheston
