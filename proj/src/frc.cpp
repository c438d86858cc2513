#include "sindykf/frc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sindykf {

namespace {

// shared sweep core over any f(x, t)
template <typename Rhs>
std::vector<FrcPoint> sweep_impl(const Rhs& make_rhs, int state_dim,
                                 const std::vector<double>& omega_grid, SweepDirection direction,
                                 const FrcSettings& settings) {
    if (omega_grid.empty()) throw std::invalid_argument("frc_sweep: empty grid");
    if (!(settings.settle_fraction > 0.0 && settings.settle_fraction < 1.0))
        throw std::invalid_argument("frc_sweep: settle_fraction must be in (0, 1)");
    if (!(settings.dt > 0.0) || !(settings.window > 0.0))
        throw std::invalid_argument("frc_sweep: window and dt must be positive");
    if (state_dim < 2) throw std::invalid_argument("frc_sweep: needs at least two states");

    std::vector<double> omegas = omega_grid;
    std::sort(omegas.begin(), omegas.end());
    if (direction == SweepDirection::Decreasing) std::reverse(omegas.begin(), omegas.end());

    Eigen::VectorXd x = settings.x0.size() == state_dim ? settings.x0
                                                        : Eigen::VectorXd::Zero(state_dim);
    const auto steps = static_cast<long>(std::llround(settings.window / settings.dt));
    const long settle_steps = static_cast<long>(steps * settings.settle_fraction);
    const double dt = settings.dt;

    std::vector<FrcPoint> out;
    out.reserve(omegas.size());
    for (double omega : omegas) {
        const auto rhs = make_rhs(omega);
        double m1 = 0.0, m2 = 0.0;
        double t = 0.0;
        for (long j = 0; j < steps; ++j) {
            const Eigen::VectorXd k1 = rhs(x, t);
            const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
            const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
            const Eigen::VectorXd k4 = rhs(x + dt * k3, t + dt);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
            if (j >= settle_steps) {
                m1 = std::max(m1, std::abs(x[0]));
                m2 = std::max(m2, std::abs(x[1]));
            }
        }
        if (!x.allFinite())
            throw std::runtime_error("frc_sweep: blow-up at omega=" + std::to_string(omega));
        out.push_back(FrcPoint{omega, m1, m2});
    }
    return out;
}

}  // namespace

std::vector<double> frc_grid(double omega_min, double omega_max, int n_points) {
    if (n_points < 1) throw std::invalid_argument("frc_grid: need at least one point");
    if (n_points == 1) return {omega_min};
    if (!(omega_max > omega_min)) throw std::invalid_argument("frc_grid: empty interval");
    std::vector<double> grid(n_points);
    for (int i = 0; i < n_points; ++i)
        grid[i] = omega_min + (omega_max - omega_min) * static_cast<double>(i) /
                                  static_cast<double>(n_points - 1);
    return grid;
}

std::vector<FrcPoint> frc_sweep(const SindyModel& model, const std::vector<double>& omega_grid,
                                SweepDirection direction, const FrcSettings& settings) {
    const auto make_rhs = [&model](double omega) {
        SindyModel tuned = model;
        tuned.library = with_forcing_frequency(model.library, omega);
        return [tuned](const Eigen::VectorXd& x, double t) { return tuned.eval_f(x, t); };
    };
    return sweep_impl(make_rhs, model.state_dim(), omega_grid, direction, settings);
}

std::vector<FrcPoint> frc_sweep(const TrueSystem& system, const std::vector<double>& omega_grid,
                                SweepDirection direction, const FrcSettings& settings) {
    const auto make_rhs = [&system](double omega) {
        TrueSystem tuned = system;
        tuned.library = with_forcing_frequency(system.library, omega);
        return [tuned](const Eigen::VectorXd& x, double t) { return tuned.rhs(x, t); };
    };
    return sweep_impl(make_rhs, system.library.state_dim(), omega_grid, direction, settings);
}

}  // namespace sindykf
