#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sindykf/scenario.hpp"
#include "sindykf/sindy_model.hpp"

namespace sindykf {

struct FrcPoint {
    double omega = 0.0;
    double u1 = 0.0;  // max |x1| over the settled tail
    double u2 = 0.0;  // max |x2|
};

enum class SweepDirection { Increasing, Decreasing };

struct FrcSettings {
    double window = 5000.0;        // integration span per grid point
    double dt = 0.05;
    double settle_fraction = 0.8;  // amplitudes read from the last (1 - fraction)
    Eigen::VectorXd x0;            // start of the first point; empty = rest
};

std::vector<double> frc_grid(double omega_min, double omega_max, int n_points);

// Steady-state amplitude sweep by time integration with state continuation:
// each grid point warm-starts from the final state of the previous one.
// Points are visited in the order implied by `direction` and reported in that
// order. Throws on blow-up, naming the frequency.
std::vector<FrcPoint> frc_sweep(const SindyModel& model, const std::vector<double>& omega_grid,
                                SweepDirection direction, const FrcSettings& settings);
std::vector<FrcPoint> frc_sweep(const TrueSystem& system, const std::vector<double>& omega_grid,
                                SweepDirection direction, const FrcSettings& settings);

}  // namespace sindykf
