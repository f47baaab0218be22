#pragma once

#include <Eigen/Dense>
#include <string>

#include "uavrsma/conic.hpp"

namespace uavrsma::conic {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 300;
  bool trace = false;  // per-iteration diagnostics on stderr
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double obj = 0.0;        // value of the (maximization) objective
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  int iters = 0;
};

/// Homogeneous self-dual interior-point solve. Deterministic for fixed inputs.
ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts = {});

}  // namespace uavrsma::conic
