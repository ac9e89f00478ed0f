#include <catch2/catch_amalgamated.hpp>

#include "headtrack/control.hpp"

using namespace headtrack;

TEST_CASE("exp_gain: boundary values") {
    REQUIRE(exp_gain(0.0, 20.0) == 0.0);
    REQUIRE(exp_gain(20.0, 20.0) == 1.0);
    REQUIRE(exp_gain(35.0, 20.0) == 1.0);
    // Direct evaluation of the piecewise law at the midpoint.
    REQUIRE(exp_gain(10.0, 20.0) == Catch::Approx(0.5 * std::exp(-0.5)).margin(1e-15));
    REQUIRE(exp_gain(10.0, 20.0) == Catch::Approx(0.3032653298563167).margin(1e-12));
}

TEST_CASE("exp_gain: continuous, monotone, bounded") {
    const double left = exp_gain(20.0 - 1e-12, 20.0);
    REQUIRE(std::abs(left - 1.0) < 1e-12);

    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double d = 20.0 * i / 1000.0;
        const double g = exp_gain(d, 20.0);
        REQUIRE(g >= 0.0);
        REQUIRE(g <= 1.0);
        REQUIRE(g >= prev);
        prev = g;
    }
}

TEST_CASE("coarse command: equilibrium gives zero") {
    const GainConfig gains{2.0, 20.0, 14.0};
    const Twist out = coarse_command(PoseError{}, Twist{}, Twist{}, gains);
    REQUIRE(out.linear.norm() == 0.0);
    REQUIRE(out.angular.norm() == 0.0);
}

TEST_CASE("coarse command: pure proportional term") {
    const GainConfig gains{2.0, 20.0, 14.0};
    PoseError e;
    e.translational = Vec3(10.0, 0.0, 0.0);
    const Twist out = coarse_command(e, Twist{}, Twist{}, gains);
    REQUIRE(out.linear.x() == Catch::Approx(20.0).margin(1e-9));
    REQUIRE(out.linear.y() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(out.angular.norm() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("coarse command: zero error suppresses velocity feedforward") {
    const GainConfig gains{2.0, 20.0, 14.0};
    Twist xdot_d;
    xdot_d.linear = Vec3(40.0, -25.0, 10.0);
    xdot_d.angular = Vec3(5.0, 5.0, -5.0);
    const Twist out = coarse_command(PoseError{}, xdot_d, Twist{}, gains);
    REQUIRE(out.linear.norm() == 0.0);
    REQUIRE(out.angular.norm() == 0.0);
}

TEST_CASE("coarse command: gains scale the two blocks separately") {
    // Tiny k_p isolates the feedforward path; a saturated translation error
    // opens the translational gate (ke_t = 1) while ke_r stays 0.
    PoseError e;
    e.translational = Vec3(20.0, 0.0, 0.0);
    Twist ff;
    ff.linear = Vec3(30.0, 0.0, 0.0);
    ff.angular = Vec3(0.0, 8.0, 0.0);
    const Twist out = coarse_command(e, ff, Twist{}, GainConfig{1e-12, 20.0, 14.0});
    REQUIRE(out.linear.x() == Catch::Approx(30.0).margin(1e-6));
    REQUIRE(out.angular.norm() < 1e-9);
}

TEST_CASE("reproduction command: at rest on target gives zero") {
    const Pose x = Pose::translate(5.0, 2.0, 1.0);
    const Twist out = reproduction_command(x, Twist{}, x, Twist{}, 3.0, 0.0167);
    REQUIRE(out.linear.norm() == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(out.angular.norm() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("reproduction command: stationary lag is corrected proportionally") {
    const Pose x_d = Pose::translate(1.0, 0.0, 0.0);
    const Pose x_m = Pose::identity();
    const Twist out = reproduction_command(x_d, Twist{}, x_m, Twist{}, 3.0, 0.0167);
    REQUIRE(out.linear.x() == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(out.linear.y() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("reproduction command: prediction overshoot drives anticipatory correction") {
    const Pose x = Pose::identity();
    Twist v;
    v.linear = Vec3(60.0, 0.0, 0.0);
    const Twist out = reproduction_command(x, v, x, v, 3.0, 0.0167);
    // Predicted pose overshoots by 60 * 0.0167 = 1.002 mm; correction ~ -3 mm/s.
    REQUIRE(out.linear.x() == Catch::Approx(57.0).margin(0.01));
}

TEST_CASE("averaging filter: mean over min(window, n)") {
    AveragingFilter f(4);
    REQUIRE(f.mean().norm() == 0.0);
    Vec6 a = Vec6::Ones();
    f.push(a * 2.0);
    REQUIRE(f.mean()(0) == Catch::Approx(2.0));
    f.push(a * 4.0);
    REQUIRE(f.mean()(0) == Catch::Approx(3.0));
    f.push(a * 4.0);
    f.push(a * 4.0);
    f.push(a * 4.0);  // evicts the first sample
    REQUIRE(f.mean()(0) == Catch::Approx(4.0));
    REQUIRE(f.size() == 4);
}

TEST_CASE("plant: zero command from rest leaves pose unchanged") {
    RobotPlant plant(Pose::translate(1.0, 2.0, 3.0), 0.008, 0.016, PlantLimits{});
    for (int k = 0; k < 100; ++k) plant.step(Twist{}, k * 0.008);
    REQUIRE((plant.pose().translation - Vec3(1.0, 2.0, 3.0)).norm() == 0.0);
    REQUIRE(plant.twist().linear.norm() == 0.0);
}

TEST_CASE("plant: motion onset matches the command delay") {
    RobotPlant plant(Pose::identity(), 0.008, 0.016, PlantLimits{});
    Twist cmd;
    cmd.linear = Vec3(80.0, 0.0, 0.0);
    double onset = -1.0;
    for (int k = 0; k < 20; ++k) {
        const double now = k * 0.008;
        const double before = plant.pose().translation.x();
        plant.step(cmd, now);
        if (onset < 0.0 && plant.pose().translation.x() > before) onset = now;
    }
    REQUIRE(onset == Catch::Approx(0.016).margin(0.008 + 1e-12));
}

TEST_CASE("plant: displacement matches the discrete closed form") {
    const double h = 0.008, delay = 0.016, v = 50.0, a = 1200.0;
    PlantLimits lim;
    lim.accel_linear = a;
    RobotPlant plant(Pose::identity(), h, delay, lim);
    Twist cmd;
    cmd.linear = Vec3(v, 0.0, 0.0);

    const int steps = 200;
    for (int k = 0; k < steps; ++k) plant.step(cmd, k * h);

    // Independent arithmetic: command matures at step ceil(delay/h); executed
    // velocity then ramps min(j * a * h, v) and integrates one period each step.
    const int k0 = static_cast<int>(std::ceil(delay / h - 1e-12));
    double expect = 0.0;
    for (int k = 0; k < steps; ++k) {
        const int j = k - k0 + 1;
        if (j >= 1) expect += std::min(j * a * h, v) * h;
    }
    REQUIRE(plant.pose().translation.x() == Catch::Approx(expect).margin(1e-9));
}

TEST_CASE("plant: velocity and acceleration limits hold") {
    PlantLimits lim;
    lim.velocity_linear = 100.0;
    lim.accel_linear = 500.0;
    RobotPlant plant(Pose::identity(), 0.01, 0.0, lim);
    Twist cmd;
    cmd.linear = Vec3(1000.0, 0.0, 0.0);
    double prev = 0.0;
    for (int k = 0; k < 100; ++k) {
        plant.step(cmd, k * 0.01);
        const double vel = plant.twist().linear.x();
        REQUIRE(vel <= 100.0 + 1e-12);
        REQUIRE(vel - prev <= 500.0 * 0.01 + 1e-12);
        prev = vel;
    }
    REQUIRE(prev == Catch::Approx(100.0));
}

TEST_CASE("plant: rotation integration stays orthonormal") {
    RobotPlant plant(Pose::identity(), 0.01, 0.0, PlantLimits::unlimited());
    Twist cmd;
    cmd.angular = Vec3(15.0, -10.0, 25.0);
    for (int k = 0; k < 2000; ++k) plant.step(cmd, k * 0.01);
    REQUIRE(orthonormality_error(plant.pose().rotation) < 1e-9);
}
