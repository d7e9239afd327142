// kdaido command-line driver.
//
// Subcommands: transition, eigen, coeffs, simulate, sweep, verify.
// Configuration comes from --config (JSON or the TOML subset) with every
// value overridable by a flag; flags win.  Exit codes: 0 ok, 1 usage or
// runtime failure, 2 ambiguous critical point, 3 assumption violation,
// 4 verification failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kdaido/harness.hpp"

namespace {

struct flag_set {
    std::string config;
    std::string dens_kind = "lorentzian";
    double gamma = 1.0, sigma = 1.0;
    double alpha1 = 0.0, alpha2 = 0.0, hh = 0.0;
    double K = 0.0, k_min = 0.0, k_max = 0.0;
    int k_count = 0;
    std::string simulator = "galerkin";
    int n = 10000, j_max = 16, m_nodes = 400, jobs = 1;
    double dt = 0.01, t_end = 200.0, burn_in = 100.0, eps = 1e-3;
    std::uint64_t seed = 0;
    std::string out;
    bool svg = false;
};

void add_common_flags(CLI::App* cmd, flag_set& f) {
    cmd->set_help_flag("--help", "print help");  // frees -h for the --h option
    cmd->add_option("--config", f.config, "JSON or TOML config file");
    cmd->add_option("--density", f.dens_kind, "lorentzian|gaussian");
    cmd->add_option("--gamma", f.gamma, "Lorentzian half width");
    cmd->add_option("--sigma", f.sigma, "Gaussian standard deviation");
    cmd->add_option("--alpha1", f.alpha1, "first-harmonic phase lag");
    cmd->add_option("--alpha2", f.alpha2, "second-harmonic phase lag");
    cmd->add_option("--h", f.hh, "second-harmonic coupling weight");
    cmd->add_option("--K", f.K, "single coupling strength");
    cmd->add_option("--K-min", f.k_min, "K grid lower end");
    cmd->add_option("--K-max", f.k_max, "K grid upper end");
    cmd->add_option("--K-count", f.k_count, "K grid point count");
    cmd->add_option("--simulator", f.simulator, "finite-n|galerkin");
    cmd->add_option("--n", f.n, "finite-N oscillator count");
    cmd->add_option("--j-max", f.j_max, "Galerkin mode cutoff");
    cmd->add_option("--m-nodes", f.m_nodes, "Galerkin frequency nodes");
    cmd->add_option("--dt", f.dt, "integrator step");
    cmd->add_option("--t-end", f.t_end, "integration horizon");
    cmd->add_option("--burn-in", f.burn_in, "measurement window start");
    cmd->add_option("--eps", f.eps, "initial coherence amplitude");
    cmd->add_option("--seed", f.seed, "seed for seeded sampling / phases");
    cmd->add_option("--jobs", f.jobs, "sweep worker threads");
    cmd->add_option("--out", f.out, "output directory (default: stdout)");
    cmd->add_flag("--svg", f.svg, "also render sweep.svg (needs --out)");
}

kdaido::experiment_spec build_spec(const CLI::App& cmd, const flag_set& f) {
    kdaido::experiment_spec spec;
    auto has = [&](const char* name) { return cmd.count(name) > 0; };
    if (has("--config")) spec = kdaido::load_spec(f.config);

    if (has("--density") || has("--gamma") || has("--sigma")) {
        const std::string kind =
            has("--density") ? f.dens_kind : (has("--sigma") ? "gaussian" : "lorentzian");
        if (kind == "lorentzian")
            spec.model = kdaido::density::lorentzian(f.gamma);
        else if (kind == "gaussian")
            spec.model = kdaido::density::gaussian(f.sigma);
        else
            throw kdaido::config_error("--density must be lorentzian or gaussian "
                                       "(mixtures via config file)");
    }
    if (has("--alpha1")) spec.alpha1 = f.alpha1;
    if (has("--alpha2")) spec.alpha2 = f.alpha2;
    if (has("--h")) spec.h = f.hh;

    const bool grid_flags = has("--K-min") || has("--K-max") || has("--K-count");
    if (has("--K") && grid_flags)
        throw kdaido::config_error("give either --K or --K-min/--K-max/--K-count, not both");
    if (has("--K")) spec.k_values = {f.K};
    if (grid_flags) {
        if (!(has("--K-min") && has("--K-max") && has("--K-count")))
            throw kdaido::config_error("a K grid needs all of --K-min, --K-max, --K-count");
        if (f.k_count < 1) throw kdaido::config_error("--K-count must be >= 1");
        if (f.k_count > 1 && !(f.k_max > f.k_min))
            throw kdaido::config_error("a K grid needs --K-max > --K-min");
        spec.k_values.clear();
        for (int i = 0; i < f.k_count; ++i)
            spec.k_values.push_back(f.k_count == 1
                                        ? f.k_min
                                        : f.k_min + (f.k_max - f.k_min) * i / (f.k_count - 1));
    }

    if (has("--simulator")) {
        if (f.simulator == "galerkin")
            spec.simulator = kdaido::simulator_kind::galerkin;
        else if (f.simulator == "finite-n" || f.simulator == "finite_n")
            spec.simulator = kdaido::simulator_kind::finite_n;
        else
            throw kdaido::config_error("--simulator must be finite-n or galerkin");
    }
    if (has("--n")) spec.n = f.n;
    if (has("--j-max")) spec.j_max = f.j_max;
    if (has("--m-nodes")) spec.m_nodes = f.m_nodes;
    if (has("--dt")) spec.dt = f.dt;
    if (has("--t-end")) spec.t_end = f.t_end;
    if (has("--burn-in")) spec.burn_in = f.burn_in;
    if (has("--eps")) spec.eps = f.eps;
    if (has("--seed")) {
        spec.seed = f.seed;
        if (spec.sampling.tag == kdaido::sample_scheme::kind::seeded)
            spec.sampling.seed = f.seed;
    }
    if (has("--jobs")) spec.jobs = f.jobs;
    if (has("--out")) spec.out_dir = f.out;
    if (f.svg) spec.svg = true;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto-Daido transition analysis and verification harness"};
    app.require_subcommand(1);
    flag_set f;

    CLI::App* c_transition =
        app.add_subcommand("transition", "critical coupling and rotation number");
    CLI::App* c_eigen = app.add_subcommand("eigen", "eigenvalue path over a K grid");
    CLI::App* c_coeffs = app.add_subcommand("coeffs", "normal-form coefficients and verdict");
    CLI::App* c_simulate = app.add_subcommand("simulate", "single run with trace output");
    CLI::App* c_sweep = app.add_subcommand("sweep", "measured vs predicted branch over a K grid");
    CLI::App* c_verify = app.add_subcommand("verify", "prediction battery with tolerances");
    for (CLI::App* c : {c_transition, c_eigen, c_coeffs, c_simulate, c_sweep, c_verify})
        add_common_flags(c, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const CLI::App* cmd = app.get_subcommands().front();
        const kdaido::experiment_spec spec = build_spec(*cmd, f);
        if (cmd == c_transition) return kdaido::cmd_transition(spec, std::cout);
        if (cmd == c_eigen) return kdaido::cmd_eigen(spec, std::cout);
        if (cmd == c_coeffs) return kdaido::cmd_coeffs(spec, std::cout);
        if (cmd == c_simulate) return kdaido::cmd_simulate(spec, std::cout);
        if (cmd == c_sweep) return kdaido::cmd_sweep(spec, std::cout);
        if (cmd == c_verify) return kdaido::cmd_verify(spec, std::cout);
        return 1;
    } catch (const kdaido::ambiguous_maximizer& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const kdaido::assumption_violation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
