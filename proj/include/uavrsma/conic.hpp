#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace uavrsma::conic {

/// Supported cone families. Exponential blocks are the closure of
/// {(x, y, z) : y > 0, y*exp(x/y) <= z}; SOC blocks are (t, u) with ||u|| <= t.
enum class Cone { Zero, NonNeg, Soc, Exp };

/// Sparse affine expression over the decision variables: sum_i coef_i * x_i + constant.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  /*implicit*/ LinExpr(double c) : constant(c) {}
  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coef);
    return e;
  }

  LinExpr& operator+=(const LinExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
    constant -= o.constant;
    return *this;
  }
  LinExpr& operator*=(double f) {
    for (auto& [i, c] : terms) c *= f;
    constant *= f;
    return *this;
  }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double f, LinExpr a) { return a *= f; }

  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [i, c] : terms) v += c * x[i];
    return v;
  }
};

/// One cone membership: the rows (affine maps) stacked into the cone.
struct ConeBlock {
  Cone cone;
  std::vector<LinExpr> rows;
  std::string label;  // optional, for diagnostics
};

/// Canonical conic program: maximize objective . x subject to every block's
/// affine map landing in its cone. Complex quantities are pre-split into
/// real/imaginary parts by the callers.
class ConicProgram {
 public:
  int add_vars(int count) {
    const int first = n_vars_;
    n_vars_ += count;
    objective_.resize(static_cast<size_t>(n_vars_), 0.0);
    return first;
  }
  int num_vars() const { return n_vars_; }

  void add_objective(int var, double coef) { objective_[static_cast<size_t>(var)] += coef; }
  const std::vector<double>& objective() const { return objective_; }

  /// expr == 0
  void add_zero(LinExpr expr, std::string label = {});
  /// expr >= 0
  void add_nonneg(LinExpr expr, std::string label = {});
  /// ||tail|| <= head; rows = (head, tail...)
  void add_soc(std::vector<LinExpr> rows, std::string label = {});
  /// y * exp(x / y) <= z
  void add_exp(LinExpr x, LinExpr y, LinExpr z, std::string label = {});

  const std::vector<ConeBlock>& blocks() const { return blocks_; }

  /// Throws std::invalid_argument on malformed blocks or variable indices.
  void validate() const;

  /// Documented sparse text dump (header: n_vars and cone list; body:
  /// triplet-form affine maps) for cross-checking against external solvers.
  void dump(std::ostream& os) const;

 private:
  int n_vars_ = 0;
  std::vector<double> objective_;
  std::vector<ConeBlock> blocks_;
};

/// Per-block cone-membership violation magnitudes at x; all (near) zero means feasible.
std::vector<double> check_solution(const ConicProgram& prog, const Eigen::VectorXd& x);

}  // namespace uavrsma::conic
