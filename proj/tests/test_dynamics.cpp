#include <cmath>
#include <numbers>
#include <random>

#include "armfatigue/dynamics.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace armfatigue;

namespace {

constexpr double kPi = std::numbers::pi;

ArmInertialModel<double> reference_body(double tool = 2.0) {
  auto m = derive_anthropometry(1.88, 90.0);
  m.tool_mass = tool;
  return m;
}

double total_energy(const ArmInertialModel<double>& m, const JointState<double>& s) {
  return kinetic_energy(m, s) + potential_energy(m, s.theta);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("derived anthropometry of the reference operator") {
    const auto m = derive_anthropometry(1.88, 90.0);
    CHECK(m.upper_arm.length == doctest::Approx(0.34968).epsilon(1e-12));
    CHECK(m.forearm_hand.length == doctest::Approx(0.47752).epsilon(1e-12));
    CHECK(m.upper_arm.mass == doctest::Approx(2.52).epsilon(1e-12));
    CHECK(m.forearm_hand.mass == doctest::Approx(1.98).epsilon(1e-12));
    CHECK(m.upper_arm.com_distance == doctest::Approx(0.436 * 0.34968).epsilon(1e-12));
    const double rg = 0.468 * 0.47752;
    CHECK(m.forearm_hand.inertia_com == doctest::Approx(1.98 * rg * rg).epsilon(1e-12));
    CHECK(m.tool_mass == 0.0);
    CHECK(m.gravity == 9.81);
  }

  TEST_CASE("segment masses scale linearly with body mass") {
    const auto a = derive_anthropometry(1.7, 60.0);
    const auto b = derive_anthropometry(1.7, 120.0);
    CHECK(b.upper_arm.mass == doctest::Approx(2 * a.upper_arm.mass));
    CHECK(b.forearm_hand.inertia_com == doctest::Approx(2 * a.forearm_hand.inertia_com));
    CHECK(b.upper_arm.length == a.upper_arm.length);
  }

  TEST_CASE("out-of-range anthropometry") {
    CHECK_THROWS_AS(derive_anthropometry(0.9, 70.0), OutOfRangeAnthropometry);
    CHECK_THROWS_AS(derive_anthropometry(2.6, 70.0), OutOfRangeAnthropometry);
    CHECK_THROWS_AS(derive_anthropometry(1.8, 20.0), OutOfRangeAnthropometry);
    CHECK_THROWS_AS(derive_anthropometry(1.8, 250.0), OutOfRangeAnthropometry);
    CHECK_NOTHROW(derive_anthropometry(1.0, 30.0));
    CHECK_NOTHROW(derive_anthropometry(2.5, 200.0));
  }

  TEST_CASE("at rest in the hanging posture every torque vanishes") {
    const auto m = reference_body();
    JointState<double> s;
    CHECK(inverse_dynamics(m, s).norm() == 0.0);
  }

  TEST_CASE("gravity torque of the horizontal straight arm") {
    const auto m = reference_body();
    const Vector2d g = gravity_torque(m, Vector2d(kPi / 2, 0.0));
    const double oracle = oracles::straight_arm_moment(m);
    CHECK(oracle == doctest::Approx(33.12).epsilon(1e-3));
    CHECK(std::abs(g[kShoulder] - oracle) / oracle < 1e-9);
    const double elbow_oracle =
        m.gravity * (m.forearm_hand.mass * m.forearm_hand.com_distance + m.tool_mass * m.forearm_hand.length);
    CHECK(std::abs(g[kElbow] - elbow_oracle) / elbow_oracle < 1e-9);
  }

  TEST_CASE("gravity torque is the gradient of the potential energy") {
    const auto m = reference_body();
    const Vector2d th(0.9, 1.2);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vector2d tp = th, tm = th;
      tp[j] += h;
      tm[j] -= h;
      const double fd = (potential_energy(m, tp) - potential_energy(m, tm)) / (2 * h);
      CHECK(gravity_torque(m, th)[j] == doctest::Approx(fd).epsilon(1e-8));
    }
  }

  TEST_CASE("mass matrix is symmetric positive definite") {
    const auto m = reference_body();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
      const Matrix2d mm = mass_matrix(m, Vector2d(ang(rng), ang(rng)));
      REQUIRE(mm(0, 1) == mm(1, 0));
      REQUIRE(mm(0, 0) > 0.0);
      REQUIRE(mm.determinant() > 0.0);
    }
  }

  TEST_CASE("Mdot - 2C is skew-symmetric") {
    const auto m = reference_body();
    const Vector2d th(0.4, 1.7), rate(1.3, -0.6);
    const double h = 1e-6;
    const Matrix2d mdot = (mass_matrix(m, Vector2d(th + h * rate)) - mass_matrix(m, Vector2d(th - h * rate))) / (2 * h);
    const Matrix2d n = mdot - 2 * coriolis_matrix(m, th, rate);
    CHECK((n + n.transpose()).norm() < 1e-8);
    CHECK(std::abs(rate.dot(n * rate)) < 1e-8);
  }

  TEST_CASE("power balance along the task trajectory") {
    const auto m = reference_body();
    const auto g = m.geometry();
    const double dt = 0.001;
    const auto traj = joint_trajectory(g, TrajectoryLeg<double>{{0.4, 0.1}, {0.6, 0.1}, 5.0}, dt);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
      const double de = (total_energy(m, traj[i + 1]) - total_energy(m, traj[i - 1])) / (2 * dt);
      const double power = traj[i].velocity.dot(inverse_dynamics(m, traj[i]));
      worst = std::max(worst, std::abs(de - power));
      scale = std::max(scale, std::abs(power));
    }
    CHECK(worst / scale < 1e-4);
  }

  TEST_CASE("external torque examples") {
    const auto g = testsupport::paper_geometry();
    // Horizontal straight arm, 10 N downward at the hand.
    const Vector2d tau = external_joint_torque(g, Vector2d(kPi / 2, 0.0), Vector2d(0.0, -10.0));
    CHECK(tau[kShoulder] == doctest::Approx(-10.0 * 0.8272).epsilon(1e-12));
    CHECK(tau[kElbow] == doctest::Approx(-10.0 * 0.47752).epsilon(1e-12));
  }

  TEST_CASE("external torque does the same virtual work as the hand force") {
    const auto g = testsupport::paper_geometry();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const Vector2d th(2 * u(rng), 1.5 + u(rng));
      const Vector2d f(30 * u(rng), 30 * u(rng));
      const Vector2d rate(u(rng), u(rng));
      const Vector2d hand_velocity = jacobian(g, th) * rate;
      REQUIRE(external_joint_torque(g, th, f).dot(rate) == doctest::Approx(f.dot(hand_velocity)).epsilon(1e-12));
    }
  }

  TEST_CASE("force conventions differ by J^T of twice the push force") {
    const auto g = testsupport::paper_geometry();
    const Vector2d th = inverse_kinematics(g, Vector2d(0.5, 0.1)).theta;
    LoadSpec exerted{20.0, 10.0, ForceConvention::kExertedByHand};
    LoadSpec reaction{20.0, 10.0, ForceConvention::kReactionOnHand};
    CHECK(hand_force(exerted, Phase::kPush) == Vector2d(-20.0, 0.0));
    CHECK(hand_force(exerted, Phase::kPull) == Vector2d(10.0, 0.0));
    CHECK(hand_force(reaction, Phase::kPush) == Vector2d(20.0, 0.0));
    const Vector2d diff = external_joint_torque(g, th, hand_force(reaction, Phase::kPush)) -
                          external_joint_torque(g, th, hand_force(exerted, Phase::kPush));
    CHECK((diff - jacobian(g, th).transpose() * Vector2d(40.0, 0.0)).norm() < 1e-12);
  }

  TEST_CASE("task demand: shoulder exceeds elbow and the load switches at the phase boundary") {
    const auto m = reference_body();
    const auto g = m.geometry();
    const LoadSpec loads{20.0, 10.0};
    const auto push = joint_trajectory(g, TrajectoryLeg<double>{{0.4, 0.1}, {0.6, 0.1}, 5.0}, 0.01);
    const auto pull = joint_trajectory(g, TrajectoryLeg<double>{{0.6, 0.1}, {0.4, 0.1}, 5.0}, 0.01);
    for (const auto& s : push) {
      const Vector2d t = total_joint_torque(m, g, s, hand_force(loads, Phase::kPush));
      REQUIRE(std::abs(t[kShoulder]) >= std::abs(t[kElbow]));
    }
    const Vector2d end_push = total_joint_torque(m, g, push.back(), hand_force(loads, Phase::kPush));
    const Vector2d start_pull = total_joint_torque(m, g, pull.front(), hand_force(loads, Phase::kPull));
    CHECK((end_push - start_pull).norm() > 1.0);
    // Same posture, same motion state: the jump is purely the load change.
    const Vector2d jump = external_joint_torque(g, push.back().theta, Vector2d(-30.0, 0.0));
    CHECK((end_push - start_pull - jump).norm() < 1e-9);
  }
}
