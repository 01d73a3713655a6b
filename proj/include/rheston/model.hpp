#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rheston/special.hpp"

namespace rheston {

// Model parameters (alpha = H + 1/2).
struct ModelParams {
    double alpha = 0.75;  // roughness order, in [1/2, 1]; 1 is classical Heston
    double lambda = 0.0;  // mean-reversion speed, >= 0
    double theta = 0.04;  // mean-reversion level, > 0
    double nu = 0.2;      // vol-of-vol, > 0
    double rho = 0.0;     // correlation, in (-1, 1)
    double v0 = 0.04;     // initial variance, > 0

    double hurst() const { return alpha - 0.5; }

    void validate() const {
        if (!(alpha >= 0.5 && alpha <= 1.0))
            throw std::invalid_argument("ModelParams: alpha must be in [0.5, 1]");
        if (!(lambda >= 0.0)) throw std::invalid_argument("ModelParams: lambda must be >= 0");
        // theta only enters through the product lambda * theta, so it may be
        // zero (or anything nonnegative) when mean reversion is switched off
        if (!(theta >= 0.0)) throw std::invalid_argument("ModelParams: theta must be >= 0");
        if (lambda > 0.0 && !(theta > 0.0))
            throw std::invalid_argument("ModelParams: theta must be positive when lambda > 0");
        if (!(nu > 0.0)) throw std::invalid_argument("ModelParams: nu must be positive");
        if (!(rho > -1.0 && rho < 1.0))
            throw std::invalid_argument("ModelParams: rho must be in (-1, 1)");
        if (!(v0 > 0.0)) throw std::invalid_argument("ModelParams: v0 must be positive");
    }
};

// Tabulated forward-variance curve with linear interpolation.
struct VarianceCurve {
    std::vector<double> u;   // tenors, strictly increasing from 0
    std::vector<double> xi;  // variances, > 0

    void validate() const {
        if (u.size() != xi.size() || u.size() < 2)
            throw std::invalid_argument("VarianceCurve: need >= 2 matching nodes");
        if (u.front() != 0.0) throw std::invalid_argument("VarianceCurve: first tenor must be 0");
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (xi[i] <= 0.0) throw std::invalid_argument("VarianceCurve: xi must be positive");
            if (i > 0 && u[i] <= u[i - 1])
                throw std::invalid_argument("VarianceCurve: tenors must be increasing");
        }
    }

    double operator()(double t) const {
        if (t <= u.front()) return xi.front();
        if (t >= u.back()) return xi.back();
        auto it = std::upper_bound(u.begin(), u.end(), t);
        std::size_t i = static_cast<std::size_t>(it - u.begin());
        double w = (t - u[i - 1]) / (u[i] - u[i - 1]);
        return xi[i - 1] + w * (xi[i] - xi[i - 1]);
    }

    // Two-column CSV (u, xi) with a header row.
    static VarianceCurve from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("VarianceCurve: cannot open " + path);
        VarianceCurve c;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string a, b;
            if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
                throw std::runtime_error("VarianceCurve: malformed row: " + line);
            c.u.push_back(std::stod(a));
            c.xi.push_back(std::stod(b));
        }
        c.validate();
        return c;
    }
};

// E(V_t) = V0 - (V0 - theta) * (1 - E_{a,1}(-lambda t^a)).
inline double expected_variance(const ModelParams& params, double t) {
    params.validate();
    if (t < 0.0) throw std::domain_error("expected_variance: t must be >= 0");
    if (t == 0.0 || params.lambda == 0.0) return params.v0;
    double integral = 1.0 - mittag_leffler(params.alpha, 1.0,
                                           -params.lambda * std::pow(t, params.alpha));
    return params.v0 - (params.v0 - params.theta) * integral;
}

// Forward-variance volatility kernel kappa(x) = nu x^{a-1} E_{a,a}(-lambda x^a).
inline double resolvent_kernel(const ModelParams& params, double x) {
    params.validate();
    if (!(x > 0.0)) throw std::domain_error("resolvent_kernel: lag must be positive");
    return params.nu * std::pow(x, params.alpha - 1.0) *
           mittag_leffler(params.alpha, params.alpha, -params.lambda * std::pow(x, params.alpha));
}

// Antiderivative of the kernel: int_0^x kappa(u) du. Lets callers integrate
// kappa exactly over a panel containing the x -> 0 singularity.
inline double resolvent_kernel_integral(const ModelParams& params, double x) {
    params.validate();
    if (x < 0.0) throw std::domain_error("resolvent_kernel_integral: lag must be >= 0");
    if (x == 0.0) return 0.0;
    if (params.lambda == 0.0)
        return params.nu * std::pow(x, params.alpha) / (params.alpha * gamma_fn(params.alpha));
    double e = mittag_leffler(params.alpha, 1.0, -params.lambda * std::pow(x, params.alpha));
    return params.nu / params.lambda * (1.0 - e);
}

// Time-dependent mean-reversion level consistent with a given variance curve:
// theta(t) = (1/lambda) D^a (E(V_t) - V0) + E(V_t).
inline std::vector<double> theta_from_curve(const ModelParams& params, const VarianceCurve& curve,
                                            const FracGrid& grid) {
    params.validate();
    curve.validate();
    if (params.lambda == 0.0)
        throw std::domain_error("theta_from_curve: lambda must be positive");
    std::vector<double> shifted(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) shifted[k] = curve(grid.node(k)) - curve(0.0);
    std::vector<double> d = frac_derivative(shifted, grid, params.alpha);
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out[k] = d[k] / params.lambda + curve(grid.node(k));
    return out;
}

}  // namespace rheston
