#include "sindykf/ekf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sindykf {

namespace {

void symmetrize(Eigen::MatrixXd& p) {
    p = 0.5 * (p + p.transpose()).eval();
}

[[noreturn]] void divergence(const char* where, double time, const std::string& detail) {
    throw std::runtime_error(std::string(where) + ": " + detail + " at t=" + std::to_string(time));
}

void check_finite(const char* where, const AugmentedBelief& b) {
    if (!b.mean.allFinite()) divergence(where, b.time, "nonfinite mean");
    if (!b.covariance.allFinite()) divergence(where, b.time, "nonfinite covariance");
}

}  // namespace

void FilterConfig::validate(int n, int rho) const {
    const int na = n + rho;
    if (q_diag.size() != na)
        throw std::invalid_argument("FilterConfig: q_diag size " + std::to_string(q_diag.size()) +
                                    ", augmented dim " + std::to_string(na));
    if (p0_diag.size() != na)
        throw std::invalid_argument("FilterConfig: p0_diag size " + std::to_string(p0_diag.size()) +
                                    ", augmented dim " + std::to_string(na));
    if (r_diag.size() != static_cast<Eigen::Index>(observed_indices.size()))
        throw std::invalid_argument("FilterConfig: r_diag vs observed_indices size mismatch");
    if (dt <= 0) throw std::invalid_argument("FilterConfig: dt must be positive");
    for (Eigen::Index i = 0; i < r_diag.size(); ++i)
        if (!(r_diag[i] > 0)) throw std::invalid_argument("FilterConfig: r_diag entries must be > 0");
    for (Eigen::Index i = 0; i < q_diag.size(); ++i)
        if (q_diag[i] < 0 || p0_diag[i] < 0)
            throw std::invalid_argument("FilterConfig: q_diag/p0_diag entries must be >= 0");
    std::vector<bool> seen(n, false);
    for (int idx : observed_indices) {
        if (idx < 0 || idx >= n)
            throw std::invalid_argument("FilterConfig: observed index " + std::to_string(idx) +
                                        " outside the dynamic state (n=" + std::to_string(n) + ")");
        if (seen[idx])
            throw std::invalid_argument("FilterConfig: duplicate observed index " +
                                        std::to_string(idx));
        seen[idx] = true;
    }
}

AugmentedBelief predict(const AugmentedBelief& belief, const SindyModel& model,
                        const FilterConfig& config) {
    const int n = model.state_dim();
    const int rho = model.adaptive_count();
    const int na = n + rho;
    if (belief.mean.size() != na || belief.covariance.rows() != na ||
        belief.covariance.cols() != na)
        throw std::invalid_argument("predict: belief dimension mismatch");

    const double dt = config.dt;
    const double t = belief.time;
    const Eigen::VectorXd x = belief.mean.head(n);

    // coefficients frozen at the current estimate through all four stages
    const SindyModel current = rho > 0 ? model.unpack_adaptive(belief.mean.tail(rho)) : model;

    const Eigen::VectorXd k1 = current.eval_f(x, t);
    const Eigen::VectorXd k2 = current.eval_f(x + 0.5 * dt * k1, t + 0.5 * dt);
    const Eigen::VectorXd k3 = current.eval_f(x + 0.5 * dt * k2, t + 0.5 * dt);
    const Eigen::VectorXd k4 = current.eval_f(x + dt * k3, t + dt);

    AugmentedBelief out;
    out.mean = belief.mean;
    out.mean.head(n) = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.time = t + dt;

    // Lyapunov RK4. F per stage at the stage time, always at the pre-step
    // mean; stage times t, t+dt/2, t+dt/2, t+dt, with the final stage using
    // t+dt for both factors.
    const Eigen::MatrixXd q = config.q_diag.asDiagonal();
    const Eigen::MatrixXd f1 = current.augmented_jacobian(x, t);
    const Eigen::MatrixXd f2 = current.augmented_jacobian(x, t + 0.5 * dt);
    const Eigen::MatrixXd f4 = current.augmented_jacobian(x, t + dt);
    const auto lyap = [&q](const Eigen::MatrixXd& f, const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
        return f * p + p * f.transpose() + q;
    };
    const Eigen::MatrixXd& p = belief.covariance;
    const Eigen::MatrixXd kp1 = lyap(f1, p);
    const Eigen::MatrixXd kp2 = lyap(f2, p + 0.5 * dt * kp1);
    const Eigen::MatrixXd kp3 = lyap(f2, p + 0.5 * dt * kp2);
    const Eigen::MatrixXd kp4 = lyap(f4, p + dt * kp3);
    out.covariance = p + (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
    symmetrize(out.covariance);

    check_finite("predict", out);
    return out;
}

AugmentedBelief correct(const AugmentedBelief& belief, const Eigen::VectorXd& y,
                        const FilterConfig& config) {
    const int o = config.observed_count();
    if (y.size() != o) throw std::invalid_argument("correct: observation size mismatch");
    if (o == 0) return belief;

    const int na = static_cast<int>(belief.mean.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(o, na);
    for (int i = 0; i < o; ++i) h(i, config.observed_indices[i]) = 1.0;

    const Eigen::MatrixXd pht = belief.covariance * h.transpose();
    Eigen::MatrixXd s = h * pht;
    s.diagonal() += config.r_diag;

    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > 1e12)
            divergence("correct", belief.time,
                       "innovation covariance ill-conditioned (cond=" +
                           std::to_string(lo > 0 ? hi / lo : std::nan("")) + ")");
    }

    const Eigen::MatrixXd gain = s.ldlt().solve(pht.transpose()).transpose();
    const Eigen::VectorXd innovation = y - h * belief.mean;

    AugmentedBelief out;
    out.time = belief.time;
    out.mean = belief.mean + gain * innovation;
    const Eigen::MatrixXd igh = Eigen::MatrixXd::Identity(na, na) - gain * h;
    out.covariance = igh * belief.covariance * igh.transpose() +
                     gain * config.r_diag.asDiagonal() * gain.transpose();
    symmetrize(out.covariance);

    check_finite("correct", out);
    return out;
}

FilterRun assimilate(const SindyModel& model0, const FilterConfig& config,
                     const std::vector<Observation>& observations, const Eigen::VectorXd& x0) {
    const int n = model0.state_dim();
    const int rho = model0.adaptive_count();
    config.validate(n, rho);
    if (x0.size() != n) throw std::invalid_argument("assimilate: x0 size mismatch");

    AugmentedBelief belief;
    belief.mean.resize(n + rho);
    belief.mean.head(n) = x0;
    belief.mean.tail(rho) = model0.pack_adaptive();
    belief.covariance = Eigen::MatrixXd(config.p0_diag.asDiagonal());
    belief.time = observations.empty() ? 0.0 : observations.front().time - config.dt;

    for (size_t j = 0; j + 1 < observations.size(); ++j) {
        const double gap = observations[j + 1].time - observations[j].time;
        if (std::abs(gap - config.dt) > 1e-6 * std::max(1.0, config.dt))
            throw std::invalid_argument("assimilate: observations not uniformly spaced by dt at j=" +
                                        std::to_string(j));
    }

    FilterRun run{belief, {}, model0};
    run.steps.reserve(observations.size());

    for (size_t j = 0; j < observations.size(); ++j) {
        try {
            belief = predict(belief, model0, config);
            const Eigen::VectorXd predicted_obs = [&] {
                Eigen::VectorXd z(config.observed_count());
                for (int i = 0; i < config.observed_count(); ++i)
                    z[i] = belief.mean[config.observed_indices[i]];
                return z;
            }();
            const Eigen::VectorXd innovation = observations[j].y - predicted_obs;
            belief = correct(belief, observations[j].y, config);
            belief.time = observations[j].time;  // resync accumulated step rounding
            const double tr = belief.covariance.trace();
            if (!std::isfinite(tr) || tr > 1e12)
                divergence("assimilate", belief.time, "covariance trace " + std::to_string(tr));
            run.steps.push_back(
                FilterStep{belief.time, belief.mean, belief.covariance.diagonal(), innovation});
        } catch (const std::exception& e) {
            throw std::runtime_error("assimilate: step " + std::to_string(j + 1) + "/" +
                                     std::to_string(observations.size()) + ": " + e.what());
        }
    }

    if (rho > 0 && !run.steps.empty())
        run.final_model = model0.unpack_adaptive(run.steps.back().mean.tail(rho));
    return run;
}

}  // namespace sindykf
