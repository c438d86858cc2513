#include <doctest.h>

#include <random>

#include "sindykf/sindy_model.hpp"

using namespace sindykf;

namespace {

SindyModel lv_table_model() {
    auto lib = build_polynomial_library(2, 2);
    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(6, 2);
    xi(lib.term_index("x1"), 0) = 1.0;
    xi(lib.term_index("x1*x2"), 0) = -0.1;
    xi(lib.term_index("x2"), 1) = -1.5;
    xi(lib.term_index("x1*x2"), 1) = 0.075;
    AdaptivityMask mask = AdaptivityMask::none(6, 2);
    mask.mask(lib.term_index("x1"), 0) = true;
    mask.mask(lib.term_index("x1*x2"), 0) = true;
    mask.mask(lib.term_index("x2"), 1) = true;
    mask.mask(lib.term_index("x1*x2"), 1) = true;
    return SindyModel{std::move(lib), std::move(xi), std::move(mask)};
}

}  // namespace

TEST_CASE("pack_adaptive follows the state-major layout") {
    const SindyModel model = lv_table_model();
    const Eigen::VectorXd packed = model.pack_adaptive();
    const Eigen::VectorXd expected = (Eigen::VectorXd(4) << 1.0, -0.1, -1.5, 0.075).finished();
    CHECK((packed - expected).norm() == 0.0);

    SindyModel none = model;
    none.mask = AdaptivityMask::none(6, 2);
    CHECK(none.pack_adaptive().size() == 0);
}

TEST_CASE("pack then unpack is the identity; the fixed part is untouched") {
    const SindyModel model = lv_table_model();
    const SindyModel back = model.unpack_adaptive(model.pack_adaptive());
    CHECK((back.xi - model.xi).norm() == 0.0);

    Eigen::VectorXd other(4);
    other << 2.0, 3.0, 4.0, 5.0;
    const SindyModel moved = model.unpack_adaptive(other);
    // split identity: masked entries replaced, everything else bit-identical
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 2; ++k)
            if (!model.mask.mask(i, k)) CHECK(moved.xi(i, k) == model.xi(i, k));
    CHECK(moved.xi(1, 0) == 2.0);

    CHECK_THROWS_AS(model.unpack_adaptive(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("unpacking zeros through an all-true mask clears the matrix") {
    SindyModel model = lv_table_model();
    model.mask.mask.setConstant(true);
    const SindyModel zeroed = model.unpack_adaptive(Eigen::VectorXd::Zero(12));
    CHECK(zeroed.xi.norm() == 0.0);
}

TEST_CASE("eval_f on the reference predator-prey coefficients") {
    const SindyModel model = lv_table_model();
    const Eigen::VectorXd f = model.eval_f(Eigen::Vector2d(10.0, 5.0), 0.0);
    CHECK(f[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(-3.75).epsilon(1e-14));

    SindyModel zero = model;
    zero.xi.setZero();
    CHECK(zero.eval_f(Eigen::Vector2d(3.0, 4.0), 0.0).norm() == 0.0);
}

TEST_CASE("eval_f equals the dense product on random inputs") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto lib = build_polynomial_library(3, 2);
    Eigen::MatrixXd xi(lib.size(), 3);
    for (int i = 0; i < xi.rows(); ++i)
        for (int k = 0; k < 3; ++k) xi(i, k) = gauss(rng);
    const SindyModel model{lib, xi, AdaptivityMask::none(lib.size(), 3)};
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(3);
        for (int k = 0; k < 3; ++k) x[k] = gauss(rng);
        const Eigen::VectorXd direct = xi.transpose() * lib.evaluate(x, 0.0);
        CHECK((model.eval_f(x, 0.0) - direct).norm() < 1e-14);
    }
}

TEST_CASE("augmented jacobian: sensitivity column for one masked entry") {
    SindyModel model = lv_table_model();
    model.mask = AdaptivityMask::none(6, 2);
    model.mask.mask(model.library.term_index("x1"), 0) = true;  // only a
    const Eigen::MatrixXd F = model.augmented_jacobian(Eigen::Vector2d(10.0, 5.0), 0.0);
    CHECK(F.rows() == 3);
    CHECK(F(0, 2) == 10.0);  // d f1 / d a = x1
    CHECK(F(1, 2) == 0.0);
    CHECK(F.row(2).norm() == 0.0);  // coefficients carry no dynamics
}

TEST_CASE("augmented jacobian matches finite differences of (x, xi_tilde) -> f") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 0.5);
    const SindyModel base = lv_table_model();
    const int n = 2, rho = 4;
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(n);
        x << gauss(rng), gauss(rng);
        Eigen::VectorXd xt = base.pack_adaptive();
        for (int j = 0; j < rho; ++j) xt[j] += gauss(rng);
        const SindyModel model = base.unpack_adaptive(xt);
        const Eigen::MatrixXd F = model.augmented_jacobian(x, 0.0);

        const double h = 1e-6;
        Eigen::MatrixXd fd(n, n + rho);
        for (int c = 0; c < n + rho; ++c) {
            Eigen::VectorXd xp = x, xm = x, xtp = xt, xtm = xt;
            if (c < n) {
                xp[c] += h;
                xm[c] -= h;
            } else {
                xtp[c - n] += h;
                xtm[c - n] -= h;
            }
            fd.col(c) = (base.unpack_adaptive(xtp).eval_f(xp, 0.0) -
                         base.unpack_adaptive(xtm).eval_f(xm, 0.0)) /
                        (2 * h);
        }
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n + rho; ++c) {
                const double scale = std::max({1.0, std::abs(F(r, c)), std::abs(fd(r, c))});
                CHECK(std::abs(F(r, c) - fd(r, c)) / scale < 1e-6);
            }
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("rho = 0 gives the plain state jacobian") {
    SindyModel model = lv_table_model();
    model.mask = AdaptivityMask::none(6, 2);
    const Eigen::Vector2d x(3.0, 2.0);
    const Eigen::MatrixXd F = model.augmented_jacobian(x, 0.0);
    CHECK(F.rows() == 2);
    const double h = 1e-6;
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Eigen::VectorXd fd = (model.eval_f(xp, 0.0) - model.eval_f(xm, 0.0)) / (2 * h);
        CHECK((F.col(c) - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("eval_f is linear in the adaptive coefficients") {
    const SindyModel base = lv_table_model();
    const Eigen::Vector2d x(4.0, 7.0);
    Eigen::VectorXd xt1(4), xt2(4);
    xt1 << 1.0, -0.2, -1.0, 0.1;
    xt2 << 0.5, -0.05, -2.0, 0.02;
    for (double alpha : {0.0, 0.3, 0.75, 1.0}) {
        const Eigen::VectorXd mix = alpha * xt1 + (1.0 - alpha) * xt2;
        const Eigen::VectorXd fmix = base.unpack_adaptive(mix).eval_f(x, 0.0);
        const Eigen::VectorXd expected = alpha * base.unpack_adaptive(xt1).eval_f(x, 0.0) +
                                         (1.0 - alpha) * base.unpack_adaptive(xt2).eval_f(x, 0.0);
        CHECK((fmix - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("model CSV round trip") {
    const SindyModel model = lv_table_model();
    const std::string dir = "model_roundtrip_test";
    save_model_csv(model, dir + ".csv", dir + "_mask.csv");
    const SindyModel back = load_model_csv(dir + ".csv", dir + "_mask.csv");
    CHECK((back.xi - model.xi).norm() == 0.0);
    CHECK((back.mask.mask == model.mask.mask).all());
    CHECK(back.library.size() == model.library.size());
    std::remove((dir + ".csv").c_str());
    std::remove((dir + "_mask.csv").c_str());
}
