#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "sindykf/ekf.hpp"
#include "sindykf/scenario.hpp"

using namespace sindykf;

namespace {

SindyModel scalar_linear_model(double lambda) {
    auto lib = build_polynomial_library(1, 1);  // [1, x]
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(2, 1);
    xi(1, 0) = lambda;
    return SindyModel{std::move(lib), std::move(xi), AdaptivityMask::none(2, 1)};
}

SindyModel lv_model_with_mask(bool masked) {
    auto lib = build_polynomial_library(2, 2);
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(6, 2);
    xi(lib.term_index("x1"), 0) = 1.0;
    xi(lib.term_index("x1*x2"), 0) = -0.1;
    xi(lib.term_index("x2"), 1) = -1.5;
    xi(lib.term_index("x1*x2"), 1) = 0.075;
    AdaptivityMask mask = AdaptivityMask::none(6, 2);
    if (masked) {
        mask.mask(lib.term_index("x1"), 0) = true;
        mask.mask(lib.term_index("x1*x2"), 0) = true;
        mask.mask(lib.term_index("x2"), 1) = true;
        mask.mask(lib.term_index("x1*x2"), 1) = true;
    }
    return SindyModel{std::move(lib), std::move(xi), std::move(mask)};
}

FilterConfig basic_config(int n, int rho, double dt, double q, double r, double p0) {
    FilterConfig c;
    c.q_diag = Eigen::VectorXd::Constant(n + rho, q);
    c.r_diag = Eigen::VectorXd::Constant(n, r);
    c.p0_diag = Eigen::VectorXd::Constant(n + rho, p0);
    for (int i = 0; i < n; ++i) c.observed_indices.push_back(i);
    c.dt = dt;
    return c;
}

double rk4_growth(double z) {
    return 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
}

}  // namespace

TEST_CASE("zero dynamics and zero process noise leave the belief unchanged") {
    SindyModel model = lv_model_with_mask(false);
    model.xi.setZero();
    FilterConfig config = basic_config(2, 0, 0.1, 0.0, 1.0, 1e-2);
    AugmentedBelief belief{Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity() * 1e-2, 3.0};
    const AugmentedBelief out = predict(belief, model, config);
    CHECK((out.mean - belief.mean).norm() == 0.0);
    CHECK((out.covariance - belief.covariance).norm() == 0.0);
    CHECK(out.time == doctest::Approx(3.1));
}

TEST_CASE("scalar linear model reproduces the RK4 growth polynomials") {
    const double lambda = -0.7, dt = 0.3, p0 = 0.42;
    const SindyModel model = scalar_linear_model(lambda);
    FilterConfig config = basic_config(1, 0, dt, 0.0, 1.0, p0);
    AugmentedBelief belief{Eigen::VectorXd::Constant(1, 2.0),
                           Eigen::MatrixXd::Constant(1, 1, p0), 0.0};
    const AugmentedBelief out = predict(belief, model, config);
    CHECK(out.mean[0] == doctest::Approx(2.0 * rk4_growth(lambda * dt)).epsilon(1e-14));
    CHECK(out.covariance(0, 0) ==
          doctest::Approx(p0 * rk4_growth(2.0 * lambda * dt)).epsilon(1e-14));
}

TEST_CASE("one predict step matches a fine-step reference integration") {
    const SindyModel model = lv_model_with_mask(false);
    const double dt = 5.130e-3;
    FilterConfig config = basic_config(2, 0, dt, 0.0, 1.0, 1e-3);
    AugmentedBelief belief{Eigen::Vector2d(10.0, 5.0), Eigen::Matrix2d::Identity() * 1e-3, 0.0};
    const AugmentedBelief out = predict(belief, model, config);

    // independent reference: 200 RK4 substeps
    Eigen::VectorXd x = belief.mean;
    const int sub = 200;
    const double h = dt / sub;
    double t = 0.0;
    for (int s = 0; s < sub; ++s) {
        const Eigen::VectorXd k1 = model.eval_f(x, t);
        const Eigen::VectorXd k2 = model.eval_f(x + 0.5 * h * k1, t + 0.5 * h);
        const Eigen::VectorXd k3 = model.eval_f(x + 0.5 * h * k2, t + 0.5 * h);
        const Eigen::VectorXd k4 = model.eval_f(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    CHECK((out.mean - x).norm() / x.norm() < 1e-9);
}

TEST_CASE("zero innovation leaves the mean and still shrinks covariance") {
    FilterConfig config = basic_config(2, 0, 0.1, 0.0, 0.5, 1.0);
    AugmentedBelief belief{Eigen::Vector2d(1.0, -2.0), Eigen::Matrix2d::Identity(), 0.0};
    const Eigen::VectorXd y = belief.mean;
    const AugmentedBelief out = correct(belief, y, config);
    CHECK((out.mean - belief.mean).norm() == 0.0);
    CHECK(out.covariance(0, 0) < belief.covariance(0, 0));
}

TEST_CASE("hand-evaluated scalar corrector") {
    FilterConfig config = basic_config(1, 0, 0.1, 0.0, 1.0, 1.0);
    AugmentedBelief belief{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0.0};
    Eigen::VectorXd y(1);
    y << 2.0;
    const AugmentedBelief out = correct(belief, y, config);
    CHECK(out.mean[0] == doctest::Approx(1.0).epsilon(1e-14));         // G = 0.5
    CHECK(out.covariance(0, 0) == doctest::Approx(0.5).epsilon(1e-14));  // Joseph form
}

TEST_CASE("an uninformative measurement barely moves the posterior") {
    FilterConfig config = basic_config(2, 0, 0.1, 0.0, 1e12, 1.0);
    AugmentedBelief belief{Eigen::Vector2d(1.0, 1.0), Eigen::Matrix2d::Identity(), 0.0};
    Eigen::VectorXd y(2);
    y << 5.0, -3.0;
    const AugmentedBelief out = correct(belief, y, config);
    CHECK((out.mean - belief.mean).norm() < 1e-9 * (y - belief.mean).norm());
}

TEST_CASE("correct with no observations is the identity") {
    FilterConfig config;
    config.q_diag = Eigen::VectorXd::Zero(2);
    config.r_diag = Eigen::VectorXd::Zero(0);
    config.p0_diag = Eigen::VectorXd::Ones(2);
    config.dt = 0.1;
    AugmentedBelief belief{Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity(), 1.0};
    const AugmentedBelief out = correct(belief, Eigen::VectorXd::Zero(0), config);
    CHECK((out.mean - belief.mean).norm() == 0.0);
    CHECK((out.covariance - belief.covariance).norm() == 0.0);
}

TEST_CASE("gain diagonal stays inside [0, 1] for diagonal structures") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> pos(1e-6, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        FilterConfig config = basic_config(2, 0, 0.1, 0.0, pos(rng), 1.0);
        config.r_diag[1] = pos(rng);
        Eigen::Matrix2d P = Eigen::Vector2d(pos(rng), pos(rng)).asDiagonal();
        AugmentedBelief belief{Eigen::Vector2d::Zero(), P, 0.0};
        // one-unit innovation in each channel separately recovers G columns
        for (int c = 0; c < 2; ++c) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
            y[c] = 1.0;
            const AugmentedBelief out = correct(belief, y, config);
            const double hg_diag = out.mean[c];  // (G)_{c,c} since mean was zero
            CHECK(hg_diag >= 0.0);
            CHECK(hg_diag <= 1.0);
        }
    }
}

TEST_CASE("assimilate with no observations returns only the initial belief") {
    const SindyModel model = lv_model_with_mask(true);
    FilterConfig config = basic_config(2, 4, 0.1, 1e-6, 1.0, 1e-3);
    const FilterRun run = assimilate(model, config, {}, Eigen::Vector2d(10.0, 5.0));
    CHECK(run.steps.empty());
    CHECK(run.initial.mean.size() == 6);
    CHECK((run.final_model.xi - model.xi).norm() == 0.0);
}

TEST_CASE("covariance stays symmetric PSD along a noisy run") {
    const Scenario scenario = builtin_scenario("lotka_volterra");
    const SindyModel model = lv_model_with_mask(true);
    SnapshotSet truth = simulate_system(scenario.truth, scenario.x0, 0.0, 5.0, scenario.dt);
    const auto obs = make_observations(truth, 25.0, 3, {0, 1});

    AugmentedBelief belief;
    belief.mean.resize(6);
    belief.mean.head(2) = scenario.x0;
    belief.mean.tail(4) = model.pack_adaptive();
    belief.covariance = Eigen::MatrixXd(scenario.filter.p0_diag.asDiagonal());
    belief.time = 0.0;

    for (size_t j = 0; j < obs.size(); ++j) {
        belief = predict(belief, model, scenario.filter);
        belief = correct(belief, obs[j].y, scenario.filter);
        if (j % 25 != 0) continue;
        const Eigen::MatrixXd& P = belief.covariance;
        CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P, Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("unmasked coefficients are bit-identical after a run") {
    Scenario scenario = builtin_scenario("lotka_volterra");
    scenario.t_end = 3.0;
    SindyModel model = lv_model_with_mask(false);
    // adapt only a; freeze b, c, d
    model.mask.mask(model.library.term_index("x1"), 0) = true;
    FilterConfig config = scenario.filter;
    config.q_diag = (Eigen::VectorXd(3) << 1e-3, 1e-3, 5e-5).finished();
    config.p0_diag = (Eigen::VectorXd(3) << 1e-3, 1e-3, 1e-4).finished();

    const SnapshotSet truth = simulate_truth(scenario);
    const auto obs = make_observations(truth, 25.0, 1, {0, 1});
    const FilterRun run = assimilate(model, config, obs, scenario.x0);

    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 2; ++k)
            if (!model.mask.mask(i, k)) CHECK(run.final_model.xi(i, k) == model.xi(i, k));
    CHECK(run.final_model.xi(model.library.term_index("x1"), 0) != model.xi(1, 0));
}

TEST_CASE("all-false mask matches an independent state-only EKF") {
    Scenario scenario = builtin_scenario("lotka_volterra");
    scenario.t_end = 2.0;
    const SindyModel model = lv_model_with_mask(false);
    FilterConfig config;
    config.q_diag = (Eigen::VectorXd(2) << 1e-3, 1e-3).finished();
    config.r_diag = (Eigen::VectorXd(2) << 1.0, 1.0).finished();
    config.p0_diag = (Eigen::VectorXd(2) << 1e-3, 1e-3).finished();
    config.observed_indices = {0, 1};
    config.dt = scenario.dt;

    const SnapshotSet truth = simulate_truth(scenario);
    const auto obs = make_observations(truth, 25.0, 7, {0, 1});
    const FilterRun run = assimilate(model, config, obs, scenario.x0);

    // reference implementation, written against the same equations but
    // independently of predict/correct
    Eigen::VectorXd mean = scenario.x0;
    Eigen::MatrixXd P = config.p0_diag.asDiagonal();
    const double dt = config.dt;
    const Eigen::MatrixXd Q = config.q_diag.asDiagonal();
    const Eigen::MatrixXd R = config.r_diag.asDiagonal();
    const auto jac = [&](const Eigen::VectorXd& x, double t) -> Eigen::MatrixXd {
        return model.xi.transpose() * model.library.jacobian(x, t);
    };
    double t = 0.0;
    for (size_t j = 0; j < obs.size(); ++j) {
        const Eigen::VectorXd k1 = model.eval_f(mean, t);
        const Eigen::VectorXd k2 = model.eval_f(mean + 0.5 * dt * k1, t + 0.5 * dt);
        const Eigen::VectorXd k3 = model.eval_f(mean + 0.5 * dt * k2, t + 0.5 * dt);
        const Eigen::VectorXd k4 = model.eval_f(mean + dt * k3, t + dt);
        const Eigen::MatrixXd f1 = jac(mean, t);
        const Eigen::MatrixXd f2 = jac(mean, t + 0.5 * dt);
        const Eigen::MatrixXd f4 = jac(mean, t + dt);
        const Eigen::MatrixXd kp1 = f1 * P + P * f1.transpose() + Q;
        const Eigen::MatrixXd a2 = P + 0.5 * dt * kp1;
        const Eigen::MatrixXd kp2 = f2 * a2 + a2 * f2.transpose() + Q;
        const Eigen::MatrixXd a3 = P + 0.5 * dt * kp2;
        const Eigen::MatrixXd kp3 = f2 * a3 + a3 * f2.transpose() + Q;
        const Eigen::MatrixXd a4 = P + dt * kp3;
        const Eigen::MatrixXd kp4 = f4 * a4 + a4 * f4.transpose() + Q;
        mean += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        P += (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
        P = 0.5 * (P + P.transpose()).eval();
        t += dt;

        const Eigen::MatrixXd S = P + R;  // H = I here
        const Eigen::MatrixXd G = P * S.inverse();
        mean += G * (obs[j].y - mean);
        const Eigen::MatrixXd IGH = Eigen::MatrixXd::Identity(2, 2) - G;
        P = IGH * P * IGH.transpose() + G * R * G.transpose();
        P = 0.5 * (P + P.transpose()).eval();

        CHECK((run.steps[j].mean - mean).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((run.steps[j].cov_diag - P.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("constant-parameter estimates settle to their posterior spread") {
    Scenario scenario = builtin_scenario("lotka_volterra");
    scenario.t_end = 30.0;
    // constant truth equal to the training parameters
    scenario.truth = scenario.training.system;
    const SindyModel model = lv_model_with_mask(true);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SnapshotSet truth = simulate_truth(scenario);
        const auto obs = make_observations(truth, 25.0, seed, {0, 1});
        const FilterRun run = assimilate(model, scenario.filter, obs, scenario.x0);
        const size_t start = run.steps.size() * 3 / 4;
        for (int param = 0; param < 4; ++param) {
            double sum = 0.0, sum2 = 0.0, var_sum = 0.0;
            size_t count = 0;
            for (size_t j = start; j < run.steps.size(); ++j) {
                const double v = run.steps[j].mean[2 + param];
                sum += v;
                sum2 += v * v;
                var_sum += std::sqrt(std::max(0.0, run.steps[j].cov_diag[2 + param]));
                ++count;
            }
            const double mean_v = sum / count;
            const double series_std = std::sqrt(std::max(0.0, sum2 / count - mean_v * mean_v));
            const double posterior_std = var_sum / count;
            CHECK(series_std < 3.0 * posterior_std);
        }
    }
}

TEST_CASE("divergence is reported with the failing step") {
    auto lib = build_polynomial_library(1, 1);
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(2, 1);
    xi(1, 0) = 80.0;  // violent growth
    const SindyModel model{lib, xi, AdaptivityMask::none(2, 1)};
    // near-uninformative measurements cannot rein the covariance back in
    FilterConfig config = basic_config(1, 0, 1.0, 0.0, 1e30, 1.0);
    std::vector<Observation> obs;
    for (int j = 1; j <= 50; ++j) obs.push_back(Observation{static_cast<double>(j),
                                                            Eigen::VectorXd::Ones(1)});
    try {
        assimilate(model, config, obs, Eigen::VectorXd::Ones(1));
        FAIL("expected divergence");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("filter config validation") {
    FilterConfig config = basic_config(2, 0, 0.1, 1e-3, 1.0, 1e-3);
    CHECK_NOTHROW(config.validate(2, 0));
    config.observed_indices = {0, 0};
    CHECK_THROWS_AS(config.validate(2, 0), std::invalid_argument);
    config.observed_indices = {0, 2};
    CHECK_THROWS_AS(config.validate(2, 0), std::invalid_argument);
    config.observed_indices = {0, 1};
    config.r_diag[0] = 0.0;
    CHECK_THROWS_AS(config.validate(2, 0), std::invalid_argument);
}
