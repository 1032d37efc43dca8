#include <cmath>
#include <random>

#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lpvplan/vehicle.hpp"
#include "oracles.hpp"

using namespace lpvplan;

namespace {

VehicleParams oracleCar() {
  VehicleParams p = presetMobile();
  p.mass = 2000.0;
  p.yawInertia = 3000.0;
  p.lF = 1.2;
  p.lR = 1.5;
  p.corneringStiffnessF = 8e4;
  p.corneringStiffnessR = 8e4;
  return p;
}

bool relClose(double got, double want, double rel) {
  if (want == 0.0) return got == 0.0;
  return std::abs(got - want) <= rel * std::abs(want);
}

Eigen::MatrixXd randomStable(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  // shift the spectrum left
  const double shift = A.eigenvalues().real().maxCoeff() + 0.5;
  return A - shift * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("presets validate") {
  CHECK_NOTHROW(presetMax().validate());
  CHECK_NOTHROW(presetMobile().validate());
  CHECK_THROWS_AS(vehiclePreset("BUS"), std::invalid_argument);
  VehicleParams bad = presetMax();
  bad.mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("symmetric vehicle has A(0,1) == -1 exactly") {
  for (double v : {0.5, 1.0, 3.7, 15.0, 40.0}) {
    VehicleParams p = presetMax();
    const auto m = lpvMatrices(p, v);
    CHECK(m.A(0, 1) == -1.0);
    p = oracleCar();
    p.lR = p.lF;
    CHECK(lpvMatrices(p, v).A(0, 1) == -1.0);
  }
}

TEST_CASE("kinematic row and disturbance column") {
  const auto m = lpvMatrices(presetMobile(), 7.5);
  CHECK(m.A(3, 0) == 7.5);
  CHECK(m.A(3, 1) == 0.0);
  CHECK(m.A(3, 2) == 7.5);
  CHECK(m.A(3, 3) == 0.0);
  CHECK(m.B(0, 2) == 0.0);
  CHECK(m.B(1, 2) == 0.0);
  CHECK(m.B(2, 2) == -1.0);
  CHECK(m.B(3, 2) == 0.0);
}

TEST_CASE("matrix entries match a hand-evaluated oracle") {
  const auto p = oracleCar();
  const auto m = lpvMatrices(p, 15.0);
  CHECK_FALSE(m.speedClamped);
  // m=2000 Jz=3000 lF=1.2 lR=1.5 c=8e4 v=15
  Matrix4d A;
  A << -160000.0 / 30000.0, 24000.0 / 450000.0 - 1.0, 0, 0,  //
      -(96000.0 - 120000.0) / 3000.0, -(115200.0 + 180000.0) / 45000.0, 0, 0,  //
      0, 1, 0, 0,  //
      15, 0, 15, 0;
  Matrix43d B;
  B << 80000.0 / 30000.0, 80000.0 / 30000.0, 0,  //
      96000.0 / 3000.0, -120000.0 / 3000.0, 0,  //
      0, 0, -1,  //
      0, 0, 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(relClose(m.A(i, j), A(i, j), 1e-12));
    for (int j = 0; j < 3; ++j) CHECK(relClose(m.B(i, j), B(i, j), 1e-12));
  }
}

TEST_CASE("speed dependence follows the stated powers") {
  const auto p = oracleCar();
  const auto a = lpvMatrices(p, 4.0);
  const auto b = lpvMatrices(p, 12.0);
  const double k = 12.0 / 4.0;
  CHECK(a.A(0, 0) / b.A(0, 0) == doctest::Approx(k).epsilon(1e-12));
  CHECK(a.A(1, 1) / b.A(1, 1) == doctest::Approx(k).epsilon(1e-12));
  CHECK((a.A(0, 1) + 1.0) / (b.A(0, 1) + 1.0) == doctest::Approx(k * k).epsilon(1e-12));
  CHECK(a.A(1, 0) == b.A(1, 0));
  CHECK(a.B(0, 0) / b.B(0, 0) == doctest::Approx(k).epsilon(1e-12));
  CHECK(a.B(1, 0) == b.B(1, 0));
}

TEST_CASE("speeds below the floor are clamped and flagged") {
  const auto p = presetMax();
  const auto low = lpvMatrices(p, 0.1);
  CHECK(low.speedClamped);
  CHECK(low.speed == kLpvSpeedFloor);
  CHECK(low.A == lpvMatrices(p, kLpvSpeedFloor).A);
  CHECK(lpvMatrices(p, 0.0).speedClamped);
  CHECK_FALSE(lpvMatrices(p, kLpvSpeedFloor).speedClamped);
  CHECK(lpvMatrices(p, 0.0).A.allFinite());
}

TEST_CASE("output matrix rows") {
  const auto p = oracleCar();
  const auto C = outputMatrix(p);
  CHECK(C.topRows<4>() == Matrix4d::Identity());
  CHECK(C.row(4) == Eigen::RowVector4d(0, 0, 1.2, 1));
  CHECK(C.row(5) == Eigen::RowVector4d(0, 0, -1.5, 1));

  const Eigen::Vector4d x(0, 0, 0.1, 0);
  const double lin = C.row(4) * x;
  CHECK(lin == doctest::Approx(0.12));
  CHECK(std::abs(lin - 1.2 * std::sin(0.1)) < 2e-4);

  const Eigen::Vector4d flat(0.01, 0.02, 0.0, 0.3);
  CHECK((C * flat)(4) == doctest::Approx(0.3));
  CHECK((C * flat)(5) == doctest::Approx(0.3));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.15, 0.15);
  for (int i = 0; i < 200; ++i) {
    const double dpsi = u(rng);
    const Eigen::Vector4d s(u(rng), u(rng), dpsi, 3 * u(rng));
    const double err = std::abs(C.row(4).dot(s) - (s(3) + p.lF * std::sin(dpsi)));
    CHECK(err <= p.lF * std::abs(dpsi * dpsi * dpsi) / 6.0 + 1e-15);
  }
}

TEST_CASE("zero-order hold") {
  SUBCASE("zero dynamics") {
    const auto d = discretize(Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Identity(4, 4), 0.2);
    CHECK(d.Ad.isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-15));
    CHECK(d.Bd.isApprox(0.2 * Eigen::MatrixXd::Identity(4, 4), 1e-15));
  }
  SUBCASE("scalar block") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A(2, 2) = -1.0;
    const auto d = discretize(A, Eigen::MatrixXd::Zero(4, 3), 0.1);
    CHECK(d.Ad(2, 2) == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
    CHECK(d.Ad(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("scalar input integral") {
    Eigen::MatrixXd A(1, 1), B(1, 1);
    A << -2.0;
    B << 3.0;
    const auto d = discretize(A, B, 0.25);
    CHECK(d.Bd(0, 0) == doctest::Approx(3.0 * (1.0 - std::exp(-0.5)) / 2.0).epsilon(1e-13));
  }
  SUBCASE("semigroup") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 30; ++i) {
      const Eigen::MatrixXd A = randomStable(rng, 4);
      const Eigen::MatrixXd B = Eigen::MatrixXd::Random(4, 3);
      const auto full = discretize(A, B, 0.05);
      const auto half = discretize(A, B, 0.025);
      const auto back = discretize(-A, B, 0.05);
      CHECK((full.Ad * back.Ad - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-9);
      CHECK((half.Ad * half.Ad - full.Ad).norm() < 1e-9);
      CHECK((half.Ad * half.Bd + half.Bd - full.Bd).norm() < 1e-9);
    }
  }
  SUBCASE("agrees with an independent matrix exponential") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 20; ++i) {
      const Eigen::MatrixXd A = 3.0 * randomStable(rng, 5);
      const Eigen::MatrixXd ref = (A * 0.3).exp();
      CHECK((expm(A * 0.3) - ref).norm() <= 1e-11 * std::max(1.0, ref.norm()));
    }
  }
  SUBCASE("first-order convergence bound") {
    for (double v : {0.5, 2.0, 10.0}) {
      const auto m = lpvMatrices(presetMobile(), v);
      for (double ts : {0.01, 0.05, 0.1}) {
        const Eigen::MatrixXd A = m.A;
        const auto d = discretize(A, Eigen::MatrixXd(m.B), ts);
        const double na = A.norm();
        const double lhs = (d.Ad - (Eigen::MatrixXd::Identity(4, 4) + A * ts)).norm();
        CHECK(lhs <= na * na * ts * ts * std::exp(na * ts) / 2.0);
      }
    }
  }
  CHECK_THROWS_AS(discretize(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1), 0.0), std::invalid_argument);
}

TEST_CASE("plant: straight running is an equilibrium") {
  const auto p = presetMobile();
  PlantState s;
  s.vx = 8.0;
  for (int i = 0; i < 1000; ++i) s = plantStep(s, {}, 1e-3, p);
  CHECK(s.x == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(s.y == 0.0);
  CHECK(s.psi == 0.0);
  CHECK(s.vy == 0.0);
  CHECK(s.yawRate == 0.0);
  CHECK(s.vx == 8.0);
}

TEST_CASE("plant: parallel steering crabs") {
  const auto p = presetMax();
  PlantState s;
  s.vx = 1.0;
  PlantCommand cmd;
  cmd.deltaF = cmd.deltaR = 0.05;
  for (int i = 0; i < 3000; ++i) s = plantStep(s, cmd, 1e-3, p);
  CHECK(std::abs(s.yawRate) < 1e-3);
  CHECK(std::abs(s.psi) < 0.02);
  CHECK(s.vy > 0.02);
  CHECK(s.wheelAngles[0] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(s.wheelAngles[3] == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("plant: wheel angles stay inside the stops") {
  const auto p = presetMax();
  PlantState s;
  s.vx = 1.0;
  PlantCommand cmd;
  cmd.deltaF = 2.0;
  cmd.deltaR = -2.0;
  cmd.maxRateF = cmd.maxRateR = 50.0;
  for (int i = 0; i < 500; ++i) {
    s = plantStep(s, cmd, 2e-3, p);
    for (double w : s.wheelAngles) REQUIRE(std::abs(w) <= p.steerStop);
  }
  CHECK(s.wheelAngles[0] == doctest::Approx(p.steerStop));
  CHECK(s.wheelAngles[2] == doctest::Approx(-p.steerStop));
  CHECK_THROWS_AS(plantStep(s, cmd, 3e-3, p), std::invalid_argument);
  CHECK_THROWS_AS(plantStep(s, cmd, 0.0, p), std::invalid_argument);
}

TEST_CASE("plant: tires only dissipate") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& p : {presetMax(), presetMobile()}) {
    auto energy = [&p](const PlantState& s) {
      return 0.5 * p.mass * (s.vx * s.vx + s.vy * s.vy) + 0.5 * p.yawInertia * s.yawRate * s.yawRate;
    };
    for (int trial = 0; trial < 10; ++trial) {
      // steered and spinning: kinetic energy is non-increasing
      PlantState s;
      s.vx = 3.0 + 2.0 * u(rng);
      s.vy = 0.3 * u(rng);
      s.yawRate = 0.3 * u(rng);
      const double df = 0.2 * u(rng), dr = 0.2 * u(rng);
      s.wheelAngles = {df, df, dr, dr};
      PlantCommand cmd;
      cmd.deltaF = df;
      cmd.deltaR = dr;
      double prev = energy(s);
      for (int i = 0; i < 1500; ++i) {
        s = plantStep(s, cmd, 1e-3, p);
        REQUIRE(energy(s) <= prev * (1.0 + 1e-12));
        prev = energy(s);
      }

      // zero inputs from a sideslip start: speed is non-increasing
      PlantState z;
      z.vx = 3.0 + 2.0 * u(rng);
      z.vy = 0.3 * u(rng);
      double last = z.speed();
      for (int i = 0; i < 1500; ++i) {
        z = plantStep(z, {}, 1e-3, p);
        REQUIRE(z.speed() <= last + 1e-12);
        last = z.speed();
      }
    }
  }
}

TEST_CASE("plant agrees with the discrete LPV rollout") {
  const auto p = presetMobile();
  const double v = 10.0;
  const double ts = 0.01;
  const auto m = lpvMatrices(p, v);
  const auto d = discretize(m.A, m.B, ts);
  for (const auto& [df, dr] : {std::pair{0.05, 0.0}, std::pair{0.05, 0.05}, std::pair{0.03, -0.03},
                               std::pair{-0.02, 0.05}}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    const Eigen::Vector3d u(df, dr, 0.0);
    PlantState s;
    s.vx = v;
    s.wheelAngles = {df, df, dr, dr};
    PlantCommand cmd;
    cmd.deltaF = df;
    cmd.deltaR = dr;
    for (int k = 0; k < 100; ++k) {
      x = d.Ad * x + d.Bd * u;
      for (int i = 0; i < 5; ++i) s = plantStep(s, cmd, 2e-3, p);
    }
    INFO("df=" << df << " dr=" << dr << " lpv=" << x(3) << " plant=" << s.y);
    REQUIRE(std::abs(x(3)) > 0.05);
    CHECK(std::abs(s.y - x(3)) <= 0.02 * std::abs(x(3)));
  }
}

TEST_CASE("contour geometry and collisions") {
  const auto p = presetMax();
  const auto body = vehicleContour(Pose2(1.0, 2.0, 0.0), p);
  REQUIRE(body.size() == 4);
  CHECK(signedArea(body) == doctest::Approx((0.28 + 0.12) * 2 * 2 * 0.22));
  CHECK(body[1].x() == doctest::Approx(1.0 + 0.4));
  CHECK(body[0].x() == doctest::Approx(1.0 - 0.4));

  const PolygonalWorld world({{{4, 4}, {5, 4}, {5, 5}, {4, 5}}}, Box2{{-10, -10}, {10, 10}});
  CHECK_FALSE(contourCollides(Pose2(-5, -5, 0.3), p, world));
  CHECK(contourCollides(Pose2(4.5, 4.5, 1.0), p, world));
  PlantState s;
  s.x = 4.5;
  s.y = 3.85;
  s.psi = 0.0;
  CHECK(contourCollides(s, p, world));
  s.y = 3.75;
  CHECK_FALSE(contourCollides(s, p, world));

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::vector<oracle::Poly> raw;
  std::vector<Polygon> polys;
  for (const Vec2 c : {Vec2(-1.5, 0.0), Vec2(1.5, 1.0), Vec2(0.0, -2.0)}) {
    raw.push_back(oracle::randomConvex(rng, c, 0.3, 0.8));
    polys.emplace_back(raw.back().begin(), raw.back().end());
  }
  const PolygonalWorld cluttered(polys, Box2{{-10, -10}, {10, 10}});
  int hits = 0;
  for (int i = 0; i < 500; ++i) {
    const Pose2 pose(u(rng), u(rng), ang(rng));
    const auto rect = vehicleContour(pose, p);
    bool expected = false;
    for (const auto& r : raw) expected = expected || oracle::satOverlap(oracle::Poly(rect.begin(), rect.end()), r);
    hits += expected;
    CHECK(contourCollides(pose, p, cluttered) == expected);
  }
  CHECK(hits > 20);
  CHECK(hits < 480);
}
