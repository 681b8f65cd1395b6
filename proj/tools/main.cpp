#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chemid/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool paper = false;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_flag("--paper", paper,
                      "full-scale profile: refinement 5 (4225 vertices), dt = 0.025");
        seed_opt = sub->add_option("--seed", seed, "noise seed (overrides the config)");
    }

    chemid::ExperimentConfig resolve() const {
        chemid::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = chemid::load_config(config_path);
        if (paper) cfg.apply_paper_scale();
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_opt->count() > 0) cfg.noise_seed = seed;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter identification for a volume-filling chemotaxis model"};
    app.require_subcommand(1);

    CommonArgs sim_args, inv_args, rat_args, chk_args;
    std::vector<double> deltas;

    CLI::App* sim = app.add_subcommand(
        "simulate", "run the forward model and write VTK snapshots");
    sim_args.attach(sim);
    CLI::App* inv = app.add_subcommand(
        "invert", "reconstruct the chemotactic sensitivity from noisy data");
    inv_args.attach(inv);
    CLI::App* rat = app.add_subcommand(
        "rates", "convergence-rate study over a list of noise levels");
    rat_args.attach(rat);
    rat->add_option("--deltas", deltas, "comma-separated noise levels")
        ->delimiter(',');
    CLI::App* chk = app.add_subcommand(
        "check", "fast invariant battery (mass, range, adjoint, assumptions)");
    chk_args.attach(chk);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return chemid::cmd_simulate(sim_args.resolve());
        if (inv->parsed()) return chemid::cmd_invert(inv_args.resolve());
        if (rat->parsed()) {
            chemid::ExperimentConfig cfg = rat_args.resolve();
            if (deltas.empty()) deltas = chemid::default_rate_deltas(rat_args.paper);
            return chemid::cmd_rates(cfg, deltas);
        }
        if (chk->parsed()) return chemid::cmd_check(chk_args.resolve());
    } catch (const std::exception& e) {
        std::cerr << "chemid: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
