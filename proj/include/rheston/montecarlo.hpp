#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rheston/model.hpp"
#include "rheston/pricing.hpp"

namespace rheston {

struct SimConfig {
    std::size_t n_paths = 50000;
    std::size_t n_steps = 256;
    double maturity = 1.0;
    std::uint64_t seed = 42;
    bool antithetic = true;

    void validate() const {
        if (n_paths < 2 || n_steps < 2)
            throw std::invalid_argument("SimConfig: need >= 2 paths and steps");
        if (!(maturity > 0.0)) throw std::invalid_argument("SimConfig: maturity must be positive");
        if (antithetic && n_paths % 2 != 0)
            throw std::invalid_argument("SimConfig: antithetic sampling needs an even path count");
    }
};

namespace detail {

// Counter-based Gaussian draws: bit-reproducible for a given (seed, path,
// step) regardless of evaluation order.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t key) {
    return (double((key >> 11)) + 0.5) * 0x1.0p-53;  // strictly inside (0,1)
}

inline void gauss_pair(std::uint64_t seed, std::uint64_t path, std::uint64_t step, double& z1,
                       double& z2) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ path);
    h = mix64(h ^ step);
    double u1 = uniform01(mix64(h ^ 0x6a09e667f3bcc909ULL));
    double u2 = uniform01(mix64(h ^ 0xbb67ae8584caa73bULL));
    double r = std::sqrt(-2.0 * std::log(u1));
    double phi = 2.0 * M_PI * u2;
    z1 = r * std::cos(phi);
    z2 = r * std::sin(phi);
}

}  // namespace detail

// Terminal samples of the log-price and auxiliary statistics.
struct McPaths {
    double maturity = 0.0;
    std::vector<double> x;               // X_T
    std::vector<double> integrated_var;  // int_0^T V_s ds (full truncation)
    std::vector<double> v_terminal;      // V at the final left node
};

// Volterra Euler scheme: V_k = xi0(t_k) + sum_{j<k} kbar_{k-j} sqrt(V_j^+) dW_j
// with kbar the exact kernel average over each lag panel, log-Euler X with
// full truncation. O(n_paths * n_steps^2).
inline McPaths simulate(const ModelParams& params, const SimConfig& config) {
    params.validate();
    config.validate();
    const std::size_t N = config.n_steps;
    const double h = config.maturity / double(N);
    const double sqh = std::sqrt(h);
    const double rho = params.rho;
    const double rhobar = std::sqrt(1.0 - rho * rho);

    std::vector<double> xi0(N + 1);
    for (std::size_t k = 0; k <= N; ++k) xi0[k] = expected_variance(params, double(k) * h);
    std::vector<double> kbar(N + 1, 0.0);
    double prev = 0.0;
    for (std::size_t m = 1; m <= N; ++m) {
        double cur = resolvent_kernel_integral(params, double(m) * h);
        kbar[m] = (cur - prev) / h;
        prev = cur;
    }

    McPaths out;
    out.maturity = config.maturity;
    out.x.resize(config.n_paths);
    out.integrated_var.resize(config.n_paths);
    out.v_terminal.resize(config.n_paths);

    std::vector<double> z1(N), z2(N), sw(N);
    for (std::size_t path = 0; path < config.n_paths; ++path) {
        if (config.antithetic && path % 2 == 1) {
            for (std::size_t j = 0; j < N; ++j) {
                z1[j] = -z1[j];
                z2[j] = -z2[j];
            }
        } else {
            for (std::size_t j = 0; j < N; ++j)
                detail::gauss_pair(config.seed, config.antithetic ? path / 2 : path, j, z1[j],
                                   z2[j]);
        }
        double x = 0.0, ivar = 0.0, v = params.v0;
        for (std::size_t j = 0; j < N; ++j) {
            double vp = v > 0.0 ? v : 0.0;
            double sv = std::sqrt(vp);
            sw[j] = sv * z1[j] * sqh;
            x += -0.5 * vp * h + sv * sqh * (rho * z1[j] + rhobar * z2[j]);
            ivar += vp * h;
            // next variance node via the kernel convolution
            double conv = 0.0;
            std::size_t k = j + 1;
            for (std::size_t m = 0; m <= j; ++m) conv += kbar[k - m] * sw[m];
            v = xi0[k] + conv;
        }
        out.x[path] = x;
        out.integrated_var[path] = ivar;
        out.v_terminal[path] = v;
    }
    return out;
}

struct McSmilePoint {
    double x = 0.0;         // scaled log-strike
    double k = 0.0;         // log-strike, k = x T^{1/2 - H}
    double price = 0.0;     // OTM forward option price (call for x >= 0)
    double se_price = 0.0;
    double vol = 0.0;       // Black implied vol
    double se_vol = 0.0;    // delta-method standard error
    bool ok = true;
};

// Implied-vol smile from simulated terminal samples; OTM payoffs, put prices
// mapped to calls by parity before inversion.
inline std::vector<McSmilePoint> mc_smile(const ModelParams& params, const McPaths& paths,
                                          const std::vector<double>& xs) {
    const double T = paths.maturity;
    const double H = params.hurst();
    const double n = double(paths.x.size());
    std::vector<McSmilePoint> out;
    out.reserve(xs.size());
    for (double x : xs) {
        McSmilePoint pt;
        pt.x = x;
        pt.k = x * std::pow(T, 0.5 - H);
        double strike = std::exp(pt.k);
        double sum = 0.0, sum2 = 0.0;
        for (double xt : paths.x) {
            double payoff = x >= 0.0 ? std::max(std::exp(xt) - strike, 0.0)
                                     : std::max(strike - std::exp(xt), 0.0);
            sum += payoff;
            sum2 += payoff * payoff;
        }
        double mean = sum / n;
        double var = std::max(sum2 / n - mean * mean, 0.0);
        pt.se_price = std::sqrt(var / n);
        pt.price = mean;
        double call = x >= 0.0 ? mean : mean + 1.0 - strike;
        try {
            pt.vol = implied_vol(call, pt.k, T);
            double vega = black_vega(pt.k, T, pt.vol);
            pt.se_vol = vega > 0.0 ? pt.se_price / vega
                                   : std::numeric_limits<double>::infinity();
        } catch (const std::domain_error&) {
            pt.ok = false;
        }
        out.push_back(pt);
    }
    return out;
}

// D(T) = int_0^T int_0^t kappa(t - s) xi0(s) ds dt with the kernel integrated
// exactly on each inner panel (midpoint value of xi0).
inline double skew_integral(const ModelParams& params, double T, std::size_t n_steps = 400) {
    params.validate();
    if (!(T > 0.0)) throw std::domain_error("skew_integral: T must be positive");
    const double h = T / double(n_steps);
    std::vector<double> kint(n_steps + 1);
    for (std::size_t m = 0; m <= n_steps; ++m)
        kint[m] = resolvent_kernel_integral(params, double(m) * h);
    std::vector<double> xi(n_steps + 1);
    for (std::size_t m = 0; m <= n_steps; ++m) xi[m] = expected_variance(params, double(m) * h);
    // inner integral at the grid nodes
    std::vector<double> inner(n_steps + 1, 0.0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            // panel s in [t_j, t_{j+1}], lag t_k - s in [(k-j-1)h, (k-j)h]
            double xi_mid = 0.5 * (xi[j] + xi[j + 1]);
            acc += xi_mid * (kint[k - j] - kint[k - j - 1]);
        }
        inner[k] = acc;
    }
    double acc = 0.0;  // trapezoid in t
    for (std::size_t k = 0; k < n_steps; ++k) acc += 0.5 * (inner[k] + inner[k + 1]) * h;
    return acc;
}

// Leading-order centered third moment of X_T: m3 = 3 rho D(T); closed form
// 3 V0 rho nu T^{1+a} / (Gamma(a) a (1+a)) when lambda = 0.
inline double third_moment(const ModelParams& params, double T, std::size_t n_steps = 400) {
    params.validate();
    if (params.lambda == 0.0) {
        double a = params.alpha;
        return 3.0 * params.v0 * params.rho * params.nu * std::pow(T, 1.0 + a) /
               (gamma_fn(a) * a * (1.0 + a));
    }
    return 3.0 * params.rho * skew_integral(params, T, n_steps);
}

// Correlation term structure implied by observed third moments:
// rho(T_i) = m3(T_i) / (3 D(T_i)), clamped to (-1, 1).
struct RhoPoint {
    double tenor = 0.0;
    double rho = 0.0;
    bool clamped = false;
};

inline std::vector<RhoPoint> calibrate_rho_term_structure(const ModelParams& params,
                                                          const std::vector<double>& tenors,
                                                          const std::vector<double>& m3,
                                                          std::size_t n_steps = 400) {
    if (tenors.size() != m3.size())
        throw std::invalid_argument("calibrate_rho_term_structure: tenor/moment size mismatch");
    std::vector<RhoPoint> out;
    out.reserve(tenors.size());
    for (std::size_t i = 0; i < tenors.size(); ++i) {
        RhoPoint p;
        p.tenor = tenors[i];
        double d = skew_integral(params, tenors[i], n_steps);
        p.rho = m3[i] / (3.0 * d);
        if (p.rho <= -1.0 || p.rho >= 1.0) {
            p.rho = std::clamp(p.rho, -0.999, 0.999);
            p.clamped = true;
        }
        out.push_back(p);
    }
    return out;
}

// Per-path forward-variance curves xi_t(u) at a simulation horizon t:
// xi_t(u) = xi0(u) + sum_{t_j < t} kbar(u - t_j panel) sqrt(V_j^+) dW_j.
// Uses the same draws as simulate() for the matching config.
inline std::vector<std::vector<double>> evolve_variance_curve(const ModelParams& params,
                                                              const SimConfig& config, double t,
                                                              const std::vector<double>& tenors) {
    params.validate();
    config.validate();
    const std::size_t N = config.n_steps;
    const double h = config.maturity / double(N);
    std::size_t n_sub = static_cast<std::size_t>(std::floor(t / h + 0.5));
    if (n_sub == 0 || n_sub > N)
        throw std::domain_error("evolve_variance_curve: horizon must lie on the step grid");
    for (double u : tenors)
        if (!(u > t)) throw std::domain_error("evolve_variance_curve: tenors must exceed horizon");

    std::vector<double> xi0(N + 1);
    for (std::size_t k = 0; k <= N; ++k) xi0[k] = expected_variance(params, double(k) * h);
    std::vector<double> kbar(N + 1, 0.0);
    double prev = 0.0;
    for (std::size_t m = 1; m <= N; ++m) {
        double cur = resolvent_kernel_integral(params, double(m) * h);
        kbar[m] = (cur - prev) / h;
        prev = cur;
    }

    std::vector<std::vector<double>> out(config.n_paths,
                                         std::vector<double>(tenors.size(), 0.0));
    std::vector<double> z1(n_sub), z2(n_sub), sw(n_sub);
    for (std::size_t path = 0; path < config.n_paths; ++path) {
        if (config.antithetic && path % 2 == 1) {
            for (std::size_t j = 0; j < n_sub; ++j) z1[j] = -z1[j];
        } else {
            for (std::size_t j = 0; j < n_sub; ++j)
                detail::gauss_pair(config.seed, config.antithetic ? path / 2 : path, j, z1[j],
                                   z2[j]);
        }
        double v = params.v0;
        for (std::size_t j = 0; j < n_sub; ++j) {
            double vp = v > 0.0 ? v : 0.0;
            sw[j] = std::sqrt(vp) * z1[j] * std::sqrt(h);
            double conv = 0.0;
            for (std::size_t m = 0; m <= j; ++m) conv += kbar[j + 1 - m] * sw[m];
            v = xi0[j + 1] + conv;
        }
        for (std::size_t i = 0; i < tenors.size(); ++i) {
            double u = tenors[i];
            double acc = expected_variance(params, u);
            for (std::size_t j = 0; j < n_sub; ++j) {
                double lag_hi = u - double(j) * h;
                double lag_lo = u - double(j + 1) * h;
                double w = (resolvent_kernel_integral(params, lag_hi) -
                            resolvent_kernel_integral(params, lag_lo)) /
                           h;
                acc += w * sw[j];
            }
            out[path][i] = acc;
        }
    }
    return out;
}

// Binary column dump. Layout: 8-byte magic "RHMC0001", then three uint64
// little-endian fields (n_paths, n_columns = 3, reserved = 0), one f64
// (maturity), then column-major little-endian f64 data in the order
// x, integrated_var, v_terminal.
inline void dump_samples(const std::string& path, const McPaths& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dump_samples: cannot open " + path);
    const char magic[8] = {'R', 'H', 'M', 'C', '0', '0', '0', '1'};
    out.write(magic, 8);
    std::uint64_t header[3] = {samples.x.size(), 3, 0};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(&samples.maturity), sizeof(double));
    auto write_col = [&](const std::vector<double>& col) {
        out.write(reinterpret_cast<const char*>(col.data()),
                  static_cast<std::streamsize>(col.size() * sizeof(double)));
    };
    write_col(samples.x);
    write_col(samples.integrated_var);
    write_col(samples.v_terminal);
}

inline McPaths load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_samples: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "RHMC0001", 8) != 0)
        throw std::runtime_error("load_samples: bad magic in " + path);
    std::uint64_t header[3];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (header[1] != 3) throw std::runtime_error("load_samples: unexpected column count");
    McPaths s;
    in.read(reinterpret_cast<char*>(&s.maturity), sizeof(double));
    auto read_col = [&](std::vector<double>& col) {
        col.resize(header[0]);
        in.read(reinterpret_cast<char*>(col.data()),
                static_cast<std::streamsize>(col.size() * sizeof(double)));
    };
    read_col(s.x);
    read_col(s.integrated_var);
    read_col(s.v_terminal);
    if (!in) throw std::runtime_error("load_samples: truncated file " + path);
    return s;
}

}  // namespace rheston
