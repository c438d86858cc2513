#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sindykf {

struct TrainOptions {
    std::string scenario;           // builtin name or config path
    std::string output_dir;
    std::optional<std::string> data_path;  // external snapshot CSV instead of simulation
    std::optional<std::uint64_t> seed;
};

struct AssimilateOptions {
    std::string scenario;
    std::string model_path;  // model CSV written by train (mask CSV alongside)
    std::string output_dir;
    std::optional<std::string> observations_path;  // external observations CSV
    std::optional<std::uint64_t> seed;
    int extra_seeds = 0;      // run seed..seed+extra_seeds, one subdirectory each
    int snapshot_every = 0;   // emit model snapshots every N steps (0 = off)
    int jobs = 1;
};

struct FrcOptions {
    std::string model_path;
    std::string output_dir;
    double omega_min = 0.95;
    double omega_max = 1.05;
    int n_points = 50;
    std::string direction = "both";  // up | down | both
    double window = 5000.0;
    double dt = 0.05;
    double settle_fraction = 0.8;
    std::optional<std::string> snapshots_dir;  // sweep every model_snapshot_*.csv too
    int jobs = 1;
};

int cmd_train(const TrainOptions& options);
int cmd_assimilate(const AssimilateOptions& options);
int cmd_frc(const FrcOptions& options);
int cmd_export(const std::string& scenario, const std::string& path);
int cmd_verify(const std::string& output_dir);

// default output root: $SINDYKF_OUT if set, else current directory
std::string default_output_root();

}  // namespace sindykf
