// Command-line front end for the rough Heston asymptotics library.
//
// Subcommands: smile | rate | largetime | h0 | mc | calibrate-theta |
// calibrate-rho. Every command is deterministic given its config; CSV output
// uses '.' decimals, a header row, and LF line endings.

#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "rheston/rheston.hpp"

namespace {

struct CliState {
    rheston::RunConfig cfg;
    std::string params_file;
    std::string preset;
    std::string out;
};

void add_common_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--params", st.params_file, "flat key=value config file");
    cmd->add_option("--preset", st.preset, "named profile: fig3|fig4|fig5|table");
    cmd->add_option("--out", st.out, "output path (default stdout)");
    cmd->add_option("--format", st.cfg.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", st.cfg.seed, "Monte Carlo seed");
    cmd->add_option("--paths", st.cfg.paths, "Monte Carlo path count");
    cmd->add_option("--steps", st.cfg.steps, "time steps");
    cmd->add_flag("--no-mc", st.cfg.no_mc, "omit Monte Carlo columns");
    cmd->add_flag("--verify", st.cfg.verify, "add cross-check columns");
    cmd->add_option("--alpha", st.cfg.params.alpha, "roughness order");
    cmd->add_option("--lambda", st.cfg.params.lambda, "mean-reversion speed");
    cmd->add_option("--theta", st.cfg.params.theta, "mean-reversion level");
    cmd->add_option("--nu", st.cfg.params.nu, "vol-of-vol");
    cmd->add_option("--rho", st.cfg.params.rho, "correlation");
    cmd->add_option("--v0", st.cfg.params.v0, "initial variance");
    cmd->add_option("--maturities", st.cfg.maturities, "maturity list")->delimiter(',');
    cmd->add_option("--xs", st.cfg.xs, "log-moneyness grid")->delimiter(',');
    cmd->add_option("--grid-points", st.cfg.grid_points, "p-grid size");
    cmd->add_option("--series-terms", st.cfg.series_terms, "series truncation order");
    cmd->add_option("--quad-points", st.cfg.quad.n_points, "quadrature points");
    cmd->add_option("--quad-umax", st.cfg.quad.u_max, "quadrature range");
    cmd->add_option("--curve", st.cfg.curve_file, "forward-variance curve CSV");
    cmd->add_option("--skew", st.cfg.skew_file, "skewness term structure CSV");
    cmd->add_option("--dump", st.cfg.dump_file, "binary sample dump path");
}

int run(CliState& st, const std::function<rheston::Table(const rheston::RunConfig&)>& fn) {
    // precedence: preset < config file < explicit flags (flags already applied
    // by CLI11 on top of defaults, so re-apply them last)
    rheston::RunConfig flag_values = st.cfg;
    rheston::RunConfig cfg;
    if (!st.preset.empty()) rheston::apply_preset(cfg, st.preset);
    if (!st.params_file.empty()) rheston::load_config_file(cfg, st.params_file);
    rheston::RunConfig defaults;
    auto pick = [](auto flag, auto def, auto base) { return flag != def ? flag : base; };
    cfg.params.alpha = pick(flag_values.params.alpha, defaults.params.alpha, cfg.params.alpha);
    cfg.params.lambda = pick(flag_values.params.lambda, defaults.params.lambda, cfg.params.lambda);
    cfg.params.theta = pick(flag_values.params.theta, defaults.params.theta, cfg.params.theta);
    cfg.params.nu = pick(flag_values.params.nu, defaults.params.nu, cfg.params.nu);
    cfg.params.rho = pick(flag_values.params.rho, defaults.params.rho, cfg.params.rho);
    cfg.params.v0 = pick(flag_values.params.v0, defaults.params.v0, cfg.params.v0);
    cfg.format = pick(flag_values.format, defaults.format, cfg.format);
    cfg.seed = pick(flag_values.seed, defaults.seed, cfg.seed);
    cfg.paths = pick(flag_values.paths, defaults.paths, cfg.paths);
    cfg.steps = pick(flag_values.steps, defaults.steps, cfg.steps);
    cfg.no_mc = flag_values.no_mc || cfg.no_mc;
    cfg.verify = flag_values.verify || cfg.verify;
    cfg.series_terms = pick(flag_values.series_terms, defaults.series_terms, cfg.series_terms);
    cfg.grid_points = pick(flag_values.grid_points, defaults.grid_points, cfg.grid_points);
    cfg.quad.n_points = pick(flag_values.quad.n_points, defaults.quad.n_points, cfg.quad.n_points);
    cfg.quad.u_max = pick(flag_values.quad.u_max, defaults.quad.u_max, cfg.quad.u_max);
    if (!flag_values.maturities.empty() && flag_values.maturities != defaults.maturities)
        cfg.maturities = flag_values.maturities;
    if (!flag_values.xs.empty()) cfg.xs = flag_values.xs;
    if (!flag_values.curve_file.empty()) cfg.curve_file = flag_values.curve_file;
    if (!flag_values.skew_file.empty()) cfg.skew_file = flag_values.skew_file;
    if (!flag_values.dump_file.empty()) cfg.dump_file = flag_values.dump_file;

    rheston::Table table = fn(cfg);
    if (st.out.empty()) {
        table.write(std::cout, cfg.format);
    } else {
        std::ofstream file(st.out, std::ios::binary);  // binary: keep LF endings
        if (!file) throw std::runtime_error("cannot open output file " + st.out);
        table.write(file, cfg.format);
    }
    return table.all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough Heston asymptotic smiles, rate functions, and Monte Carlo"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* desc;
        rheston::Table (*fn)(const rheston::RunConfig&);
    };
    const Entry entries[] = {
        {"smile", "small-maturity smile table (asymptotic / higher-order / MC)",
         rheston::cmd_smile},
        {"rate", "rate function I(x) and Lambda_bar(p) table", rheston::cmd_rate},
        {"largetime", "large-time cgf, rate function, and limiting smile",
         rheston::cmd_largetime},
        {"h0", "H=0 Edgeworth smile (alpha = 1/2)", rheston::cmd_h0},
        {"mc", "Monte Carlo smile at the first maturity", rheston::cmd_mc},
        {"calibrate-theta", "theta(t) from a forward-variance curve",
         rheston::cmd_calibrate_theta},
        {"calibrate-rho", "rho(T) from a skewness term structure", rheston::cmd_calibrate_rho},
    };

    std::vector<std::unique_ptr<CliState>> states;
    for (const Entry& e : entries) {
        auto st = std::make_unique<CliState>();
        CLI::App* cmd = app.add_subcommand(e.name, e.desc);
        add_common_flags(cmd, *st);
        CliState* stp = st.get();
        auto fn = e.fn;
        cmd->callback([stp, fn]() {
            int rc = run(*stp, fn);
            if (rc != 0) std::exit(rc);
        });
        states.push_back(std::move(st));
    }

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
