#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sindykf/sindy_model.hpp"

namespace sindykf {

// Mean and covariance of the augmented state [x, xi_tilde].
struct AugmentedBelief {
    Eigen::VectorXd mean;        // n + rho
    Eigen::MatrixXd covariance;  // symmetric PSD, (n+rho)^2
    double time = 0.0;
};

struct FilterConfig {
    Eigen::VectorXd q_diag;   // n + rho, per-unit-time process-noise intensities
    Eigen::VectorXd r_diag;   // o, measurement-noise variances (> 0)
    Eigen::VectorXd p0_diag;  // n + rho
    std::vector<int> observed_indices;  // distinct, each < n
    double dt = 0.0;

    int observed_count() const { return static_cast<int>(observed_indices.size()); }
    void validate(int n, int rho) const;
};

// One RK4 step of the mean (xi_tilde frozen through all four stages) and of
// the covariance Lyapunov ODE Pdot = F P + P F^T + Q, with F the augmented
// Jacobian recomputed per stage at the stage time but at the pre-step mean.
// The result covariance is symmetrised.
AugmentedBelief predict(const AugmentedBelief& belief, const SindyModel& model,
                        const FilterConfig& config);

// Linear-selection measurement update: Kalman gain, mean shift by the
// innovation, Joseph-form covariance update, symmetrise. o = 0 is the
// identity.
AugmentedBelief correct(const AugmentedBelief& belief, const Eigen::VectorXd& y,
                        const FilterConfig& config);

struct Observation {
    double time = 0.0;
    Eigen::VectorXd y;
};

struct FilterStep {
    double time = 0.0;
    Eigen::VectorXd mean;        // posterior
    Eigen::VectorXd cov_diag;    // posterior covariance diagonal
    Eigen::VectorXd innovation;  // y - H x^-
};

struct FilterRun {
    AugmentedBelief initial;
    std::vector<FilterStep> steps;
    SindyModel final_model;
};

// Algorithm loop: predict/correct across a uniformly spaced observation
// sequence starting at x0 and the model's packed coefficients. Throws on
// divergence (nonfinite values or trace(P) > 1e12) naming the step.
FilterRun assimilate(const SindyModel& model0, const FilterConfig& config,
                     const std::vector<Observation>& observations,
                     const Eigen::VectorXd& x0);

}  // namespace sindykf
