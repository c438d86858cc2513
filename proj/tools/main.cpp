#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "sindykf/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sindykf: sparse nonlinear system identification with online EKF adaptation"};
    app.require_subcommand(1);

    std::string scenario, out_dir, model_path, direction = "both", config_out;
    std::string data_path, observations_path, snapshots_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int seeds = 1, jobs = 1, snapshot_every = 0, n_points = 50;
    double omega_min = 0.95, omega_max = 1.05, window = 5000.0, dt = 0.05, settle = 0.8;
    bool verify = false;

    const auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the scenario seed")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* train = app.add_subcommand("train", "offline model identification for a scenario");
    train->add_option("--scenario,--config", scenario, "builtin scenario name or config path")
        ->required();
    train->add_option("--out", out_dir, "output directory")
        ->default_val(sindykf::default_output_root());
    train->add_option("--data", data_path, "external snapshot CSV (t,x...[,xdot...])");
    add_seed(train);

    auto* assim = app.add_subcommand("assimilate", "online EKF run against scenario observations");
    assim->add_option("--scenario,--config", scenario, "builtin scenario name or config path")
        ->required();
    assim->add_option("--model", model_path, "trained model CSV")->required();
    assim->add_option("--out", out_dir, "output directory")
        ->default_val(sindykf::default_output_root());
    assim->add_option("--observations", observations_path, "external observations CSV (t,y...)");
    assim->add_option("--seeds", seeds, "number of consecutive seeds to run")->default_val(1);
    assim->add_option("--jobs", jobs, "worker threads for multi-seed batches")->default_val(1);
    assim->add_option("--snapshot-every", snapshot_every, "emit model snapshots every N steps");
    add_seed(assim);

    auto* frc = app.add_subcommand("frc", "frequency response curves by swept time integration");
    frc->add_option("--model", model_path, "model CSV (needs a forcing term)")->required();
    frc->add_option("--out", out_dir, "output directory")
        ->default_val(sindykf::default_output_root());
    frc->add_option("--omega-min", omega_min)->default_val(0.95);
    frc->add_option("--omega-max", omega_max)->default_val(1.05);
    frc->add_option("--points", n_points)->default_val(50);
    frc->add_option("--direction", direction, "up | down | both")->default_val("both");
    frc->add_option("--window", window, "integration span per grid point")->default_val(5000.0);
    frc->add_option("--dt", dt)->default_val(0.05);
    frc->add_option("--settle", settle, "fraction of the window treated as transient")
        ->default_val(0.8);
    frc->add_option("--snapshots", snapshots_dir, "directory with model_snapshot_*.csv to sweep too");
    frc->add_option("--jobs", jobs, "worker threads across sweeps")->default_val(1);

    auto* exp = app.add_subcommand("export", "write a scenario as an editable config file");
    exp->add_option("--scenario", scenario, "builtin scenario name or config path")->required();
    exp->add_option("--out", config_out, "config file path")->required();

    auto* ver = app.add_subcommand("verify", "recompute manifest checksums and report drift");
    ver->add_option("--out", out_dir, "output directory holding manifest.json")->required();

    // --verify on a producing command checks its previous outputs instead of
    // re-running it
    for (auto* cmd : {train, assim, frc})
        cmd->add_flag("--verify", verify, "verify the manifest in --out and exit");

    CLI11_PARSE(app, argc, argv);

    if (verify && (train->parsed() || assim->parsed() || frc->parsed()))
        return sindykf::cmd_verify(out_dir);

    if (train->parsed()) {
        sindykf::TrainOptions o;
        o.scenario = scenario;
        o.output_dir = out_dir;
        if (!data_path.empty()) o.data_path = data_path;
        if (seed_set) o.seed = seed;
        return sindykf::cmd_train(o);
    }
    if (assim->parsed()) {
        sindykf::AssimilateOptions o;
        o.scenario = scenario;
        o.model_path = model_path;
        o.output_dir = out_dir;
        if (!observations_path.empty()) o.observations_path = observations_path;
        if (seed_set) o.seed = seed;
        o.extra_seeds = seeds - 1;
        o.snapshot_every = snapshot_every;
        o.jobs = jobs;
        return sindykf::cmd_assimilate(o);
    }
    if (frc->parsed()) {
        sindykf::FrcOptions o;
        o.model_path = model_path;
        o.output_dir = out_dir;
        o.omega_min = omega_min;
        o.omega_max = omega_max;
        o.n_points = n_points;
        o.direction = direction;
        o.window = window;
        o.dt = dt;
        o.settle_fraction = settle;
        if (!snapshots_dir.empty()) o.snapshots_dir = snapshots_dir;
        o.jobs = jobs;
        return sindykf::cmd_frc(o);
    }
    if (exp->parsed()) return sindykf::cmd_export(scenario, config_out);
    if (ver->parsed()) return sindykf::cmd_verify(out_dir);
    return 1;
}
