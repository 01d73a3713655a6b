#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rheston/largetime.hpp"
#include "rheston/montecarlo.hpp"
#include "rheston/pricing.hpp"

namespace rheston {

// Shared configuration for all CLI commands.
struct RunConfig {
    ModelParams params;
    std::vector<double> maturities = {0.00005, 0.005};
    std::vector<double> xs;  // empty: command-specific default grid
    std::string format = "csv";
    std::uint64_t seed = 42;
    std::size_t paths = 20000;
    std::size_t steps = 500;
    bool no_mc = false;
    bool verify = false;
    std::size_t series_terms = 15;
    std::size_t grid_points = 81;
    QuadratureSpec quad = {1600, 40.0};
    std::string curve_file;  // calibrate-theta input CSV (u, xi)
    std::string skew_file;   // calibrate-rho input CSV (tenor, m3)
    std::string dump_file;   // optional binary sample dump for mc
};

// Result table; all values pre-formatted so CSV and JSON renderings agree.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool all_ok = true;

    void write_csv(std::ostream& out) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << columns[i] << (i + 1 < columns.size() ? "," : "");
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << row[i] << (i + 1 < row.size() ? "," : "");
            out << '\n';
        }
    }

    void write_json(std::ostream& out) const {
        auto quote = [](const std::string& s) { return "\"" + s + "\""; };
        out << "{\n  \"columns\": [";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << quote(columns[i]) << (i + 1 < columns.size() ? ", " : "");
        out << "],\n  \"rows\": [\n";
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out << "    [";
            for (std::size_t i = 0; i < rows[r].size(); ++i)
                out << quote(rows[r][i]) << (i + 1 < rows[r].size() ? ", " : "");
            out << "]" << (r + 1 < rows.size() ? "," : "") << "\n";
        }
        out << "  ]\n}\n";
    }

    void write(std::ostream& out, const std::string& format) const {
        if (format == "csv")
            write_csv(out);
        else if (format == "json")
            write_json(out);
        else
            throw std::invalid_argument("Table: unknown format '" + format + "'");
    }
};

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::vector<double> default_x_grid() {
    std::vector<double> xs;
    for (int i = -5; i <= 5; ++i) xs.push_back(double(i) * 0.02);
    return xs;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * double(i) / double(n - 1);
    return out;
}

}  // namespace detail

// Named parameter profiles matching the paper's numerical experiments.
inline void apply_preset(RunConfig& cfg, const std::string& name) {
    if (name == "fig3" || name == "table" || name == "fig4") {
        cfg.params.alpha = 0.75;
        cfg.params.lambda = 0.0;
        cfg.params.theta = 0.04;
        cfg.params.nu = 0.15;
        cfg.params.rho = -0.02;
        cfg.params.v0 = 0.04;
        cfg.maturities = name == "fig4" ? std::vector<double>{0.005}
                                        : std::vector<double>{0.00005, 0.005};
        cfg.xs = detail::default_x_grid();
    } else if (name == "fig5") {
        cfg.params.alpha = 0.5;
        cfg.params.lambda = 0.0;
        cfg.params.theta = 0.04;
        cfg.params.nu = 0.2;
        cfg.params.rho = -0.1;
        cfg.params.v0 = 0.04;
        cfg.quad = {1600, 40.0};
        cfg.xs = detail::linspace(-0.4, 0.4, 41);
    } else {
        throw std::invalid_argument("apply_preset: unknown preset '" + name + "'");
    }
}

// Flat key=value config file; '#' comments; unknown keys rejected with the
// offending line number.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    auto parse_list = [](const std::string& s) {
        std::vector<double> out;
        std::istringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line.substr(0, line.find('#'));
        auto first = trimmed.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        auto strip = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = strip(trimmed.substr(0, eq));
        std::string val = strip(trimmed.substr(eq + 1));
        try {
            if (key == "alpha") cfg.params.alpha = std::stod(val);
            else if (key == "lambda") cfg.params.lambda = std::stod(val);
            else if (key == "theta") cfg.params.theta = std::stod(val);
            else if (key == "nu") cfg.params.nu = std::stod(val);
            else if (key == "rho") cfg.params.rho = std::stod(val);
            else if (key == "v0") cfg.params.v0 = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "paths") cfg.paths = std::stoull(val);
            else if (key == "steps") cfg.steps = std::stoull(val);
            else if (key == "format") cfg.format = val;
            else if (key == "series_terms") cfg.series_terms = std::stoull(val);
            else if (key == "grid_points") cfg.grid_points = std::stoull(val);
            else if (key == "quad_points") cfg.quad.n_points = std::stoull(val);
            else if (key == "quad_umax") cfg.quad.u_max = std::stod(val);
            else if (key == "maturities") cfg.maturities = parse_list(val);
            else if (key == "xs") cfg.xs = parse_list(val);
            else if (key == "curve") cfg.curve_file = val;
            else if (key == "skew") cfg.skew_file = val;
            else
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed value for '" + key + "'");
        }
    }
}

// Small-maturity smile table: asymptotic, higher-order saddlepoint, and
// optionally Monte Carlo columns, per maturity.
inline Table cmd_smile(const RunConfig& cfg) {
    RunConfig c = cfg;
    if (c.xs.empty()) c.xs = detail::default_x_grid();
    c.params.validate();
    Table t;
    t.columns = {"maturity", "x", "sigma_hat", "sigma_higher_order"};
    if (!c.no_mc) {
        t.columns.push_back("sigma_mc");
        t.columns.push_back("mc_stderr");
    }
    SmallTimeSmile smile(c.params, c.series_terms);
    const double H = c.params.hurst();
    for (double T : c.maturities) {
        std::vector<McSmilePoint> mc;
        if (!c.no_mc) {
            SimConfig sim{c.paths, c.steps, T, c.seed, true};
            mc = mc_smile(c.params, simulate(c.params, sim), c.xs);
        }
        for (std::size_t i = 0; i < c.xs.size(); ++i) {
            double x = c.xs[i];
            std::vector<std::string> row = {detail::fmt(T), detail::fmt(x)};
            row.push_back(detail::fmt(smile(x)));
            if (std::fabs(x) < 1e-12) {
                row.push_back("-");  // saddle degenerates at the money
            } else {
                try {
                    ContourConfig cc;
                    cc.series_terms = c.series_terms;
                    PriceResult pr = saddle_contour_call(c.params, x, T, true, cc);
                    double k = x * std::pow(T, 0.5 - H);
                    row.push_back(detail::fmt(implied_vol(pr.price, k, T)));
                } catch (const std::exception&) {
                    row.push_back("error");
                    t.all_ok = false;
                }
            }
            if (!c.no_mc) {
                if (mc[i].ok) {
                    row.push_back(detail::fmt(mc[i].vol));
                    row.push_back(detail::fmt(mc[i].se_vol));
                } else {
                    row.push_back("flagged");
                    row.push_back(detail::fmt(mc[i].se_price));
                    t.all_ok = false;
                }
            }
            t.rows.push_back(row);
        }
    }
    return t;
}

// Rate-function export: Lambda_bar on a p grid (with divergence markers at
// the critical moments) alongside I(x), p* on the x grid.
inline Table cmd_rate(const RunConfig& cfg) {
    RunConfig c = cfg;
    if (c.xs.empty()) c.xs = detail::default_x_grid();
    c.params.validate();
    LambdaTable table = build_lambda_table(c.params);
    double pp = std::pow(table.t_star_plus, table.alpha);
    double pm = -std::pow(table.t_star_minus, table.alpha);
    std::vector<double> ps = detail::linspace(0.999 * pm, 0.999 * pp, c.grid_points);
    ps.push_back(pm);
    ps.push_back(0.0);
    ps.push_back(pp);
    std::sort(ps.begin(), ps.end());

    Table t;
    t.columns = {"p", "lambda_bar", "x", "I", "p_star"};
    std::size_t n = std::max(ps.size(), c.xs.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row(5, "");
        if (i < ps.size()) {
            row[0] = detail::fmt(ps[i]);
            row[1] = detail::fmt(lambda_bar(table, c.params.v0, ps[i]));
        }
        if (i < c.xs.size()) {
            RatePoint rp = rate_function(table, c.params, c.xs[i]);
            row[2] = detail::fmt(c.xs[i]);
            row[3] = detail::fmt(rp.rate);
            row[4] = detail::fmt(rp.p_star);
        }
        t.rows.push_back(row);
    }
    return t;
}

// Large-time export: V(p) on the effective domain, V*(x) and the limiting
// smile; --verify adds a long-horizon Adams cross-check of V(p).
inline Table cmd_largetime(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params.validate();
    if (c.xs.empty()) c.xs = detail::linspace(-0.5, 0.5, 21);
    LargeTimeDomain dom = domain_endpoints(c.params);
    std::vector<double> ps = detail::linspace(dom.p_lower, dom.p_upper, c.grid_points);
    ps.push_back(0.0);
    ps.push_back(1.0);
    std::sort(ps.begin(), ps.end());

    Table t;
    t.columns = {"p", "V", "x", "V_star", "p_star", "sigma_inf"};
    if (c.verify) t.columns.push_back("V_adams_check");
    std::size_t n = std::max(ps.size(), c.xs.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row(6, "");
        if (i < ps.size()) {
            row[0] = detail::fmt(ps[i]);
            row[1] = detail::fmt(limiting_cgf(c.params, ps[i]));
        }
        if (i < c.xs.size()) {
            RatePoint rp = rate_function_large(c.params, c.xs[i]);
            row[2] = detail::fmt(c.xs[i]);
            row[3] = detail::fmt(rp.rate);
            row[4] = detail::fmt(rp.p_star);
            row[5] = detail::fmt(smile_infinity(c.params, c.xs[i]));
        }
        if (c.verify) {
            std::string check;
            if (i < ps.size()) {
                const double t_long = 50.0;
                auto mv = log_mgf(c.params, ps[i], t_long, 1500);
                check = mv.finite ? detail::fmt(std::real(mv.log_mgf) / t_long) : "inf";
            }
            row.push_back(check);
        }
        t.rows.push_back(row);
    }
    return t;
}

// H = 0 Edgeworth smile (requires alpha = 1/2).
inline Table cmd_h0(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params.validate();
    if (c.xs.empty()) c.xs = detail::linspace(-0.4, 0.4, 41);
    H0Config hc;
    hc.quad = c.quad;
    H0Pricer pricer(c.params, hc);
    Table t;
    t.columns = {"x", "sigma0", "put_price"};
    for (double x : c.xs) {
        PriceResult pr = pricer.put(x);
        t.rows.push_back({detail::fmt(x), detail::fmt(bachelier_inverse(x, pr.price)),
                          detail::fmt(pr.price)});
    }
    return t;
}

// Monte Carlo smile at the first requested maturity.
inline Table cmd_mc(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params.validate();
    if (c.xs.empty()) c.xs = detail::default_x_grid();
    if (c.maturities.empty()) throw std::invalid_argument("cmd_mc: need a maturity");
    double T = c.maturities.front();
    SimConfig sim{c.paths, c.steps, T, c.seed, true};
    McPaths paths = simulate(c.params, sim);
    if (!c.dump_file.empty()) dump_samples(c.dump_file, paths);
    Table t;
    t.columns = {"x", "k", "price", "se_price", "vol", "se_vol", "ok"};
    for (const McSmilePoint& pt : mc_smile(c.params, paths, c.xs)) {
        t.rows.push_back({detail::fmt(pt.x), detail::fmt(pt.k), detail::fmt(pt.price),
                          detail::fmt(pt.se_price), pt.ok ? detail::fmt(pt.vol) : "flagged",
                          pt.ok ? detail::fmt(pt.se_vol) : "-", pt.ok ? "1" : "0"});
        if (!pt.ok) t.all_ok = false;
    }
    return t;
}

// Mean-reversion level theta(t) backed out from a forward-variance curve.
inline Table cmd_calibrate_theta(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params.validate();
    if (c.curve_file.empty())
        throw std::invalid_argument("calibrate-theta: needs a curve CSV (curve=...)");
    VarianceCurve curve = VarianceCurve::from_csv(c.curve_file);
    FracGrid grid(curve.u.back(), std::max<std::size_t>(c.steps, 8));
    std::vector<double> th = theta_from_curve(c.params, curve, grid);
    Table t;
    t.columns = {"t", "theta"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        t.rows.push_back({detail::fmt(grid.node(k)), detail::fmt(th[k])});
    return t;
}

// Correlation term structure from an observed skewness term structure
// (CSV columns: tenor, m3; m3 interpreted as a function of maturity T).
inline Table cmd_calibrate_rho(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.params.validate();
    if (c.skew_file.empty())
        throw std::invalid_argument("calibrate-rho: needs a skew CSV (skew=...)");
    std::ifstream in(c.skew_file);
    if (!in) throw std::runtime_error("calibrate-rho: cannot open " + c.skew_file);
    std::vector<double> tenors, m3;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw std::runtime_error("calibrate-rho: malformed row: " + line);
        tenors.push_back(std::stod(a));
        m3.push_back(std::stod(b));
    }
    Table t;
    t.columns = {"tenor", "rho", "clamped"};
    for (const RhoPoint& p : calibrate_rho_term_structure(c.params, tenors, m3)) {
        t.rows.push_back({detail::fmt(p.tenor), detail::fmt(p.rho), p.clamped ? "1" : "0"});
        if (p.clamped) t.all_ok = false;
    }
    return t;
}

}  // namespace rheston
