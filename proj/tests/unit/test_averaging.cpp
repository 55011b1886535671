#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "surgekit/averaging.hpp"
#include "surgekit/ode.hpp"

using namespace surgekit;
using doctest::Approx;

namespace {

AveragedPoint at(double k1, double k2, double gamma = 1.0, double r = 0.55) {
  AveragedPoint p;
  p.k1 = k1;
  p.k2 = k2;
  p.gamma = gamma;
  p.r = r;
  return p;
}

Eigen::Matrix3d fd_jacobian(const AveragedPoint& p) {
  Eigen::Matrix3d J;
  for (int j = 0; j < 3; ++j) {
    AveragedPoint up = p, dn = p;
    double* ku[] = {&up.k1, &up.k2, &up.k3};
    double* kd[] = {&dn.k1, &dn.k2, &dn.k3};
    const double h = 1e-6 * std::max(1.0, std::abs(*ku[j]));
    *ku[j] += h;
    *kd[j] -= h;
    const auto a = averaged_rhs(up), b = averaged_rhs(dn);
    for (int i = 0; i < 3; ++i) J(i, j) = (a[i] - b[i]) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("averaged rhs") {
  for (double k2 : {0.0, 0.5, 3.0, 40.0}) {
    const auto f = averaged_rhs(at(1 + k2, k2));
    CHECK(std::abs(f[0]) <= 1e-15);
    CHECK(std::abs(f[1]) <= 1e-15);
    CHECK(f[2] == 0.0);
  }
  const auto f = averaged_rhs(at(10, 10));
  CHECK(f[0] == Approx(0.3025 / 11).epsilon(1e-12));
  CHECK(f[1] == Approx(-0.3025 * 10 / 121).epsilon(1e-12));
  CHECK(f[2] == 0.0);

  AveragedPoint sat = at(10, 10);
  sat.mode = ActuatorMode::saturated;
  CHECK(averaged_rhs(sat) == std::array<double, 3>{0, 0, 0});
  CHECK_THROWS_AS(averaged_rhs(at(1, -1)), SingularityError);
}

TEST_CASE("analytic jacobian") {
  const Matrix3 J = averaged_jacobian(at(10, 10));
  CHECK(J[0][0] == Approx(-0.3025 / 11).epsilon(1e-12));
  CHECK(J[2] == std::array<double, 3>{0, 0, 0});
  CHECK_THROWS_AS(averaged_jacobian(at(1, -1)), SingularityError);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> k(0.0, 50.0), g(0.1, 5.0), r(0.1, 1.0);
  for (int n = 0; n < 50; ++n) {
    const AveragedPoint p = at(k(rng), k(rng), g(rng), r(rng));
    const Matrix3 A = averaged_jacobian(p);
    const Eigen::Matrix3d F = fd_jacobian(p);
    const double scale = std::max(1e-12, F.cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(std::abs(A[i][j] - F(i, j)) <= 1e-6 * scale);
    }
    CHECK(std::abs(A[0][0] * A[1][1] - A[0][1] * A[1][0]) <= 1e-12);
  }
}

TEST_CASE("eigenvalues at the initial controller") {
  const auto lam = averaged_eigenvalues(at(10, 10));
  CHECK(std::abs(lam[0]) <= 1e-12);
  CHECK(std::abs(lam[1]) <= 1e-12);
  CHECK(lam[2] == Approx(-0.3025 * 211.0 / 1331.0).epsilon(1e-12));
  CHECK(std::abs(lam[2] + 0.04795) <= 1e-4);

  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::Matrix3d>(fd_jacobian(at(10, 10))).eigenvalues();
  double smallest = 0.0;
  for (int i = 0; i < 3; ++i) smallest = std::min(smallest, ev[i].real());
  CHECK(smallest == Approx(lam[2]).epsilon(1e-6));

  const auto twice = averaged_eigenvalues(at(10, 10, 2.0));
  CHECK(twice[2] / lam[2] == Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(twice[0]) <= 1e-12);

  const auto k1_zero = averaged_eigenvalues(at(0, 4));
  CHECK(k1_zero[2] == Approx(-0.3025 / 5).epsilon(1e-12));
}

TEST_CASE("eigenvalue structure over a grid") {
  const AveragedPoint base;
  for (const auto& p : averaging_grid(0.0, 50.0, 0.0, 50.0, 15, base)) {
    const auto lam = averaged_eigenvalues(p);
    CHECK(std::abs(lam[0]) <= 1e-12);
    CHECK(std::abs(lam[1]) <= 1e-12);
    CHECK(lam[2] <= 0.0);
    AveragedPoint g2 = p, r2 = p;
    g2.gamma *= 3.0;
    r2.r *= 2.0;
    CHECK(averaged_eigenvalues(g2)[2] == Approx(3.0 * lam[2]).epsilon(1e-12));
    CHECK(averaged_eigenvalues(r2)[2] == Approx(4.0 * lam[2]).epsilon(1e-12));
  }
}

TEST_CASE("stability verdict") {
  const AveragedPoint base;
  const auto grid = averaging_grid(0.1, 50.0, 0.1, 50.0, 10, base);
  REQUIRE(grid.size() == 100);
  CHECK(grid[1].k1 > grid[0].k1);
  CHECK(grid[1].k2 == grid[0].k2);
  for (const auto& row : stability_verdict(grid)) {
    CHECK(row.stable);
    CHECK(row.eigenvalues[0] <= 1e-9);
  }

  AveragedPoint sat;
  sat.mode = ActuatorMode::saturated;
  const auto rows = stability_verdict({sat});
  CHECK(rows[0].eigenvalues == std::array<double, 3>{0, 0, 0});
  CHECK(rows[0].stable);
  CHECK(verdict_label(rows[0].stable) == "stable");

  CHECK(stability_verdict({at(10, 10)})[0].eigenvalues[2] < 0.0);
  CHECK_THROWS_AS(stability_verdict({at(1, -1)}), Error);
  CHECK(stability_verdict(grid).size() == serial::stability_verdict(grid).size());
  const auto par = stability_verdict(grid), ser = serial::stability_verdict(grid);
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i].eigenvalues == ser[i].eigenvalues);
}

TEST_CASE("averaged dynamics converge to the fixed-point manifold") {
  SystemDescriptor s;
  s.dimension = 3;
  s.output_names = {"k1", "k2", "k3"};
  s.rhs = [](double, std::span<const double> k, std::span<double> dk) {
    const auto f = averaged_rhs(at(k[0], k[1]));
    for (int i = 0; i < 3; ++i) dk[i] = f[i];
  };
  const std::vector<double> k0{10.0, 10.0, 0.7};
  const Trajectory t = integrate(s, k0, 0.5, 2000.0);
  const auto last = t.row(t.size() - 1);
  CHECK(std::abs(last[0] - (1 + last[1])) <= 1e-4);
  CHECK(last[2] == 0.7);
}
