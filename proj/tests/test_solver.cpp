#include <cmath>
#include <random>

#include "doctest.h"
#include "uavrsma/conic.hpp"
#include "uavrsma/solver.hpp"

using namespace uavrsma::conic;

TEST_CASE("LP: simple bounded maximization") {
  // max x0 + x1 s.t. x0 <= 2, x1 <= 3, x >= 0
  ConicProgram p;
  const int v = p.add_vars(2);
  p.add_objective(v, 1.0);
  p.add_objective(v + 1, 1.0);
  p.add_nonneg(LinExpr(2.0) - LinExpr::var(v));
  p.add_nonneg(LinExpr(3.0) - LinExpr::var(v + 1));
  p.add_nonneg(LinExpr::var(v));
  p.add_nonneg(LinExpr::var(v + 1));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.obj == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.x[1] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("SOC: norm lower bound") {
  // maximize -x s.t. ||(1)|| <= x  ->  x* = 1, obj = -1
  ConicProgram p;
  const int v = p.add_vars(1);
  p.add_objective(v, -1.0);
  p.add_soc({LinExpr::var(v), LinExpr(1.0)});
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.obj == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Exp cone: (1,1,z) membership forces z >= e") {
  ConicProgram p;
  const int v = p.add_vars(1);
  p.add_objective(v, -1.0);
  p.add_exp(LinExpr(1.0), LinExpr(1.0), LinExpr::var(v));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-6));
}

TEST_CASE("infeasible orthant constraints are detected") {
  // x <= 3 and x >= 5
  ConicProgram p;
  const int v = p.add_vars(1);
  p.add_objective(v, 1.0);
  p.add_nonneg(LinExpr(3.0) - LinExpr::var(v));
  p.add_nonneg(LinExpr::var(v) - LinExpr(5.0));
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded problem is detected") {
  ConicProgram p;
  const int v = p.add_vars(1);
  p.add_objective(v, 1.0);
  p.add_nonneg(LinExpr::var(v));
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("equality constraints via zero cone") {
  // max x0 s.t. x0 + x1 = 1, x1 >= 0.25
  ConicProgram p;
  const int v = p.add_vars(2);
  p.add_objective(v, 1.0);
  p.add_zero(LinExpr::var(v) + LinExpr::var(v + 1) - LinExpr(1.0));
  p.add_nonneg(LinExpr::var(v + 1) - LinExpr(0.25));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.obj == doctest::Approx(0.75).epsilon(1e-7));
}

TEST_CASE("log-utility maximization via exp cone matches closed form") {
  // max u1 + u2 s.t. u_i <= ln(t_i), t1 + 2 t2 <= 4, t >= 0
  // optimum: t1 = 2, t2 = 1 (water-filling), obj = ln 2
  ConicProgram p;
  const int t = p.add_vars(2);
  const int u = p.add_vars(2);
  p.add_objective(u, 1.0);
  p.add_objective(u + 1, 1.0);
  p.add_exp(LinExpr::var(u), LinExpr(1.0), LinExpr::var(t));
  p.add_exp(LinExpr::var(u + 1), LinExpr(1.0), LinExpr::var(t + 1));
  p.add_nonneg(LinExpr(4.0) - LinExpr::var(t) - 2.0 * LinExpr::var(t + 1));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[t] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(sol.x[t + 1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.obj == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("hyperbolic constraint through SOC: maximize z^2 <= x*y budgeted") {
  // max z s.t. ||(2z, x - y)|| <= x + y, x + y <= 2, x,y >= 0 -> xy >= z^2,
  // optimum x = y = 1, z = 1.
  ConicProgram p;
  const int v = p.add_vars(3);  // x y z
  p.add_objective(v + 2, 1.0);
  p.add_soc({LinExpr::var(v) + LinExpr::var(v + 1),
             2.0 * LinExpr::var(v + 2),
             LinExpr::var(v) - LinExpr::var(v + 1)});
  p.add_nonneg(LinExpr(2.0) - LinExpr::var(v) - LinExpr::var(v + 1));
  p.add_nonneg(LinExpr::var(v));
  p.add_nonneg(LinExpr::var(v + 1));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.obj == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("check_solution flags constructed violations") {
  ConicProgram p;
  const int v = p.add_vars(2);
  p.add_soc({LinExpr::var(v), LinExpr::var(v + 1)});
  Eigen::VectorXd x(2);
  x << 1.0, 1.5;
  auto viol = check_solution(p, x);
  CHECK(viol[0] == doctest::Approx(0.5));
  x << 2.0, 1.5;
  CHECK(check_solution(p, x)[0] == doctest::Approx(0.0));
}

TEST_CASE("solver round-trip feasibility on random feasible LPs") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    ConicProgram p;
    const int n = 6;
    const int v = p.add_vars(n);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0[i] = std::abs(gauss(rng)) + 0.1;
    // constraints a'x <= a'x0 + slack keep x0 feasible; objective random
    for (int r = 0; r < 8; ++r) {
      LinExpr e;
      double rhs = 0.5;
      for (int i = 0; i < n; ++i) {
        const double a = gauss(rng);
        e += a * LinExpr::var(v + i);
        rhs += a * x0[i];
      }
      p.add_nonneg(LinExpr(rhs) - e);
    }
    for (int i = 0; i < n; ++i) p.add_nonneg(LinExpr::var(v + i));
    // nonpositive objective keeps the maximization bounded over x >= 0
    for (int i = 0; i < n; ++i) p.add_objective(v + i, -std::abs(gauss(rng)));
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    for (double viol : check_solution(p, sol.x)) CHECK(viol <= 1e-6);
  }
}

TEST_CASE("determinism: identical programs give identical iterates") {
  auto build = [] {
    ConicProgram p;
    const int v = p.add_vars(2);
    p.add_objective(v, 1.0);
    p.add_objective(v + 1, 2.0);
    p.add_soc({LinExpr(3.0), LinExpr::var(v), LinExpr::var(v + 1)});
    return p;
  };
  auto s1 = solve(build());
  auto s2 = solve(build());
  REQUIRE(s1.status == SolveStatus::Optimal);
  CHECK(s1.x == s2.x);
  CHECK(s1.obj == s2.obj);
}
