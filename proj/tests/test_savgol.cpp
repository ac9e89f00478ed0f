#include <catch2/catch_amalgamated.hpp>

#include "headtrack/savgol.hpp"

#include <random>

using namespace headtrack;

TEST_CASE("savgol: parameter validation") {
    REQUIRE_THROWS_AS(SavitzkyGolay(16, 4, 1.0), InvalidConfig);  // even window
    REQUIRE_THROWS_AS(SavitzkyGolay(5, 5, 1.0), InvalidConfig);   // degree >= window
    REQUIRE_THROWS_AS(SavitzkyGolay(17, 4, 0.0), InvalidConfig);  // dt
    const SavitzkyGolay f(17, 4, 1.0);
    Eigen::MatrixXd tiny = Eigen::MatrixXd::Zero(10, 1);
    REQUIRE_THROWS_AS(f.filter(tiny, 0), InvalidConfig);          // series < window
    Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(20, 1);
    REQUIRE_THROWS_AS(f.filter(ok, 3), InvalidConfig);            // deriv out of range
}

TEST_CASE("savgol: quartic reproduced exactly, derivatives analytic") {
    const double dt = 1.0 / 60.0;
    const SavitzkyGolay f(17, 4, dt);
    const int n = 120;
    Eigen::MatrixXd y(n, 1);
    auto poly = [](double t) { return 2.0 - 3.0 * t + 0.7 * t * t - 0.2 * t * t * t + 0.05 * t * t * t * t; };
    auto d1 = [](double t) { return -3.0 + 1.4 * t - 0.6 * t * t + 0.2 * t * t * t; };
    auto d2 = [](double t) { return 1.4 - 1.2 * t + 0.6 * t * t; };
    for (int i = 0; i < n; ++i) y(i, 0) = poly(i * dt);

    const Eigen::MatrixXd s0 = f.filter(y, 0);
    const Eigen::MatrixXd s1 = f.filter(y, 1);
    const Eigen::MatrixXd s2 = f.filter(y, 2);
    for (int i = 8; i < n - 8; ++i) {
        const double t = i * dt;
        REQUIRE(s0(i, 0) == Catch::Approx(poly(t)).margin(1e-9));
        REQUIRE(s1(i, 0) == Catch::Approx(d1(t)).margin(1e-9));
        REQUIRE(s2(i, 0) == Catch::Approx(d2(t)).margin(1e-9));
    }
    // Endpoint handling: a quartic is inside the model space, so edges are
    // exact as well.
    REQUIRE(s0(0, 0) == Catch::Approx(poly(0.0)).margin(1e-9));
    REQUIRE(s1(n - 1, 0) == Catch::Approx(d1((n - 1) * dt)).margin(1e-8));
}

TEST_CASE("savgol: first derivative of t^3 matches 3 t^2") {
    const double dt = 1.0 / 60.0;
    const SavitzkyGolay f(17, 4, dt);
    const int n = 90;
    Eigen::MatrixXd y(n, 1);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        y(i, 0) = t * t * t;
    }
    const Eigen::MatrixXd s1 = f.filter(y, 1);
    for (int i = 8; i < n - 8; ++i) {
        const double t = i * dt;
        REQUIRE(s1(i, 0) == Catch::Approx(3.0 * t * t).margin(1e-6));
    }
}

TEST_CASE("savgol: deriv-1 of deriv-0 output equals analytic for low-degree input") {
    const double dt = 0.01;
    const SavitzkyGolay f(17, 4, dt);
    const int n = 150;
    Eigen::MatrixXd y(n, 1);
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        y(i, 0) = 1.0 + 4.0 * t - 2.5 * t * t + 0.3 * t * t * t;
    }
    const Eigen::MatrixXd chained = f.filter(f.filter(y, 0), 1);
    for (int i = 20; i < n - 20; ++i) {
        const double t = i * dt;
        REQUIRE(chained(i, 0) == Catch::Approx(4.0 - 5.0 * t + 0.9 * t * t).margin(1e-9));
    }
}

TEST_CASE("savgol: white-noise variance attenuated by the coefficient norm") {
    const SavitzkyGolay f(17, 4, 1.0);
    const double expected_ratio = f.weights(0, 0).squaredNorm();

    std::mt19937 gen(991);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n = 400;
    double in_var = 0.0, out_var = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd y(n, 1);
        for (int i = 0; i < n; ++i) y(i, 0) = noise(gen);
        const Eigen::MatrixXd s = f.filter(y, 0);
        for (int i = 8; i < n - 8; ++i) {
            in_var += y(i, 0) * y(i, 0);
            out_var += s(i, 0) * s(i, 0);
        }
    }
    REQUIRE(out_var / in_var == Catch::Approx(expected_ratio).epsilon(0.10));
}

TEST_CASE("savgol: filters each column independently") {
    const SavitzkyGolay f(17, 2, 1.0);
    const int n = 60;
    Eigen::MatrixXd y(n, 2);
    for (int i = 0; i < n; ++i) {
        y(i, 0) = 3.0 * i;
        y(i, 1) = -0.5 * i * i;
    }
    const Eigen::MatrixXd s1 = f.filter(y, 1);
    for (int i = 8; i < n - 8; ++i) {
        REQUIRE(s1(i, 0) == Catch::Approx(3.0).margin(1e-9));
        REQUIRE(s1(i, 1) == Catch::Approx(-1.0 * i).margin(1e-9));
    }
}
