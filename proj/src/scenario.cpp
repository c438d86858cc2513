#include "sindykf/scenario.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sindykf/rng.hpp"

namespace sindykf {

Eigen::MatrixXd TrueSystem::xi_at(double t) const {
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(library.size(), library.state_dim());
    for (const auto& c : coefficients) xi(c.term, c.state) = c.schedule.value(t);
    return xi;
}

Eigen::VectorXd TrueSystem::rhs(const Eigen::VectorXd& x, double t) const {
    const Eigen::VectorXd theta = library.evaluate(x, t);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(library.state_dim());
    for (const auto& c : coefficients) f[c.state] += c.schedule.value(t) * theta[c.term];
    return f;
}

SnapshotSet simulate_system(const TrueSystem& system, const Eigen::VectorXd& x0, double t0,
                            double t_end, double dt) {
    if (!(dt > 0) || !(t_end > t0)) throw std::invalid_argument("simulate_system: bad window");
    // grid: t0 + j*dt for j = 0..steps; the window is traversed in whole
    // steps, with the final sample within dt/2 of t_end (the case-study
    // constants do not divide exactly)
    const auto steps = static_cast<Eigen::Index>(std::llround((t_end - t0) / dt));
    if (steps < 1) throw std::invalid_argument("simulate_system: window shorter than one step");
    const int n = system.library.state_dim();
    if (x0.size() != n) throw std::invalid_argument("simulate_system: x0 size mismatch");

    SnapshotSet out;
    out.times.resize(steps + 1);
    out.states.resize(steps + 1, n);
    out.derivatives.resize(steps + 1, n);

    Eigen::VectorXd x = x0;
    for (Eigen::Index j = 0; j <= steps; ++j) {
        const double t = t0 + static_cast<double>(j) * dt;
        out.times[j] = t;
        out.states.row(j) = x.transpose();
        out.derivatives.row(j) = system.rhs(x, t).transpose();
        if (!x.allFinite())
            throw std::runtime_error("simulate_system: nonfinite state at t=" + std::to_string(t));
        if (j == steps) break;
        const Eigen::VectorXd k1 = system.rhs(x, t);
        const Eigen::VectorXd k2 = system.rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
        const Eigen::VectorXd k3 = system.rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
        const Eigen::VectorXd k4 = system.rhs(x + dt * k3, t + dt);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

FeatureLibrary Scenario::model_library() const {
    return build_polynomial_library(truth.library.state_dim(), library_degree, forcing);
}

SnapshotSet simulate_truth(const Scenario& scenario) {
    return simulate_system(scenario.truth, scenario.x0, scenario.t0, scenario.t_end, scenario.dt);
}

std::vector<Observation> make_observations(const SnapshotSet& truth, double snr_db,
                                           std::uint64_t seed,
                                           const std::vector<int>& observed_indices,
                                           bool snr_is_linear) {
    if (truth.times.size() == 0) throw std::invalid_argument("make_observations: empty truth");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("make_observations: SNR must be finite");

    const Eigen::Index T = truth.times.size();
    std::vector<double> noise_std(observed_indices.size());
    for (size_t c = 0; c < observed_indices.size(); ++c) {
        const auto col = truth.states.col(observed_indices[c]);
        const double rms = std::sqrt(col.squaredNorm() / static_cast<double>(T));
        noise_std[c] = snr_is_linear ? rms / snr_db : rms * std::pow(10.0, -snr_db / 20.0);
    }

    GaussianSource gauss(seed);
    std::vector<Observation> obs;
    obs.reserve(T - 1);
    // observations start one step after t0 (the filter is initialised there)
    for (Eigen::Index j = 1; j < T; ++j) {
        Observation o;
        o.time = truth.times[j];
        o.y.resize(observed_indices.size());
        for (size_t c = 0; c < observed_indices.size(); ++c)
            o.y[c] = truth.states(j, observed_indices[c]) + noise_std[c] * gauss.next();
        obs.push_back(std::move(o));
    }
    return obs;
}

std::vector<Observation> exact_observations(const SnapshotSet& truth,
                                            const std::vector<int>& observed_indices) {
    const Eigen::Index T = truth.times.size();
    std::vector<Observation> obs;
    obs.reserve(T > 0 ? T - 1 : 0);
    for (Eigen::Index j = 1; j < T; ++j) {
        Observation o;
        o.time = truth.times[j];
        o.y.resize(observed_indices.size());
        for (size_t c = 0; c < observed_indices.size(); ++c)
            o.y[c] = truth.states(j, observed_indices[c]);
        obs.push_back(std::move(o));
    }
    return obs;
}

std::vector<Observation> scenario_observations(const Scenario& scenario,
                                               const SnapshotSet& truth) {
    if (scenario.snr_db)
        return make_observations(truth, *scenario.snr_db, scenario.seed,
                                 scenario.filter.observed_indices, scenario.snr_is_linear);
    return exact_observations(truth, scenario.filter.observed_indices);
}

SindyModel train_scenario(const Scenario& scenario) {
    const auto& spec = scenario.training;
    if (spec.initial_states.empty())
        throw std::invalid_argument("train_scenario: no training trajectories defined");

    FeatureLibrary model_lib = scenario.model_library();
    const int p = model_lib.size();

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p, model_lib.state_dim());
    Eigen::Index total_rows = 0;

    const auto accumulate = [&](const TrueSystem& system, const FeatureLibrary& lib,
                                const Eigen::VectorXd& x0) {
        const SnapshotSet data = simulate_system(system, x0, 0.0, spec.t_end, spec.dt);
        const Eigen::MatrixXd theta = assemble_regression(lib, data);
        gram.noalias() += theta.transpose() * theta;
        rhs.noalias() += theta.transpose() * data.derivatives;
        total_rows += theta.rows();
    };

    if (spec.forcing_frequencies.empty()) {
        for (const auto& x0 : spec.initial_states) accumulate(spec.system, model_lib, x0);
    } else {
        for (double omega : spec.forcing_frequencies) {
            TrueSystem sys = spec.system;
            sys.library = with_forcing_frequency(sys.library, omega);
            const FeatureLibrary lib = with_forcing_frequency(model_lib, omega);
            for (const auto& x0 : spec.initial_states) accumulate(sys, lib, x0);
        }
    }

    if (total_rows < p)
        std::cerr << "train_scenario: only " << total_rows << " snapshots for " << p
                  << " candidate terms; the regression is underdetermined\n";

    Eigen::MatrixXd xi = stlsq_normal(gram, rhs, scenario.stlsq);

    SindyModel model{std::move(model_lib), std::move(xi), scenario.mask};
    for (const auto& o : scenario.initial_model_overrides) {
        if (o.scale)
            model.xi(o.term, o.state) *= o.factor;
        else
            model.xi(o.term, o.state) = o.value;
    }
    return model;
}

FilterRun run_scenario(const Scenario& scenario, const SindyModel& model0) {
    const SnapshotSet truth = simulate_truth(scenario);
    const auto obs = scenario_observations(scenario, truth);
    return assimilate(model0, scenario.filter, obs, scenario.x0);
}

}  // namespace sindykf
