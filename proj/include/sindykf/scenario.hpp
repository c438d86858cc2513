#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sindykf/ekf.hpp"
#include "sindykf/feature_library.hpp"
#include "sindykf/schedule.hpp"
#include "sindykf/sindy_model.hpp"
#include "sindykf/stlsq.hpp"

namespace sindykf {

// True vector field expressed over a feature library with per-coefficient
// schedules. Everything the case studies need (polynomial dynamics plus a
// cosine drive) fits this form, and analytic training derivatives come free.
struct ScheduledCoefficient {
    int term = 0;
    int state = 0;
    ParameterSchedule schedule;
};

struct TrueSystem {
    FeatureLibrary library;
    std::vector<ScheduledCoefficient> coefficients;

    Eigen::MatrixXd xi_at(double t) const;
    Eigen::VectorXd rhs(const Eigen::VectorXd& x, double t) const;
};

// Fixed-step RK4 with schedule values picked up at each stage time.
// Throws on nonfinite states.
SnapshotSet simulate_system(const TrueSystem& system, const Eigen::VectorXd& x0,
                            double t0, double t_end, double dt);

// Named coefficient for reports: model coefficient = sign * value at
// (term, state). Mirrors the reference columns of the case-study tables.
struct ReferenceEntry {
    std::string name;
    int term = 0;
    int state = 0;
    double sign = 1.0;
    double value = 0.0;
};

// Offline training data definition. `system` is the system the model is
// fitted to (it can differ from the online truth, e.g. a reference device
// before parameter drift). If forcing_frequencies is nonempty, one trajectory
// per frequency is generated with the drive retuned in both the system and
// the model library.
struct TrainingSpec {
    TrueSystem system;
    std::vector<Eigen::VectorXd> initial_states;
    double t_end = 0.0;
    double dt = 0.0;
    std::vector<double> forcing_frequencies;
};

struct CoefficientOverride {
    int term = 0;
    int state = 0;
    double value = 0.0;    // used when `scale` is false
    double factor = 1.0;   // used when `scale` is true
    bool scale = false;
};

struct Scenario {
    std::string name;
    std::string family;  // lotka_volterra | selkov | mems_arch

    TrueSystem truth;
    Eigen::VectorXd x0;
    double t0 = 0.0;
    double t_end = 0.0;
    double dt = 0.0;
    std::optional<double> snr_db;  // absent = noise-free observations
    bool snr_is_linear = false;
    std::uint64_t seed = 1;

    int library_degree = 2;
    std::optional<ForcingSpec> forcing;
    StlsqSettings stlsq;
    AdaptivityMask mask;
    FilterConfig filter;
    TrainingSpec training;
    std::vector<ReferenceEntry> reference;
    // edits applied to the trained model before filtering (e.g. seeding an
    // inactive coefficient at 1e-9 instead of 0, which would kill the
    // Jacobian sensitivity path that lets the filter grow it)
    std::vector<CoefficientOverride> initial_model_overrides;

    FeatureLibrary model_library() const;
};

SnapshotSet simulate_truth(const Scenario& scenario);

std::vector<Observation> make_observations(const SnapshotSet& truth, double snr_db,
                                           std::uint64_t seed,
                                           const std::vector<int>& observed_indices,
                                           bool snr_is_linear = false);

// noise-free observation sequence (snr absent)
std::vector<Observation> exact_observations(const SnapshotSet& truth,
                                            const std::vector<int>& observed_indices);

std::vector<Observation> scenario_observations(const Scenario& scenario,
                                               const SnapshotSet& truth);

Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

// Offline stage: simulate the training set with analytic derivatives,
// accumulate normal equations, run STLSQ, attach the scenario mask and any
// initial-model overrides.
SindyModel train_scenario(const Scenario& scenario);

// Full online stage for a scenario: truth, observations, assimilate.
FilterRun run_scenario(const Scenario& scenario, const SindyModel& model0);

}  // namespace sindykf
