#include "uavrsma/conic.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace uavrsma::conic {

void ConicProgram::add_zero(LinExpr expr, std::string label) {
  blocks_.push_back({Cone::Zero, {std::move(expr)}, std::move(label)});
}

void ConicProgram::add_nonneg(LinExpr expr, std::string label) {
  blocks_.push_back({Cone::NonNeg, {std::move(expr)}, std::move(label)});
}

void ConicProgram::add_soc(std::vector<LinExpr> rows, std::string label) {
  if (rows.size() < 2) throw std::invalid_argument("SOC block needs a head and at least one tail row");
  blocks_.push_back({Cone::Soc, std::move(rows), std::move(label)});
}

void ConicProgram::add_exp(LinExpr x, LinExpr y, LinExpr z, std::string label) {
  blocks_.push_back({Cone::Exp, {std::move(x), std::move(y), std::move(z)}, std::move(label)});
}

void ConicProgram::validate() const {
  for (const auto& blk : blocks_) {
    if (blk.cone == Cone::Exp && blk.rows.size() != 3)
      throw std::invalid_argument("exponential cone block must be 3-dimensional");
    if (blk.cone == Cone::Soc && blk.rows.size() < 2)
      throw std::invalid_argument("SOC block must have dimension >= 2");
    if ((blk.cone == Cone::Zero || blk.cone == Cone::NonNeg) && blk.rows.size() != 1)
      throw std::invalid_argument("scalar cone block must have one row");
    for (const auto& row : blk.rows)
      for (const auto& [i, c] : row.terms) {
        if (i < 0 || i >= n_vars_) throw std::invalid_argument("variable index out of range");
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient");
      }
  }
  for (double c : objective_)
    if (!std::isfinite(c)) throw std::invalid_argument("non-finite objective coefficient");
}

void ConicProgram::dump(std::ostream& os) const {
  os << "conicprog v1\n";
  os << "vars " << n_vars_ << "\n";
  os << "blocks " << blocks_.size() << "\n";
  for (const auto& blk : blocks_) {
    const char* name = blk.cone == Cone::Zero     ? "zero"
                       : blk.cone == Cone::NonNeg ? "nonneg"
                       : blk.cone == Cone::Soc    ? "soc"
                                                  : "exp";
    os << "block " << name << " " << blk.rows.size() << "\n";
    for (size_t r = 0; r < blk.rows.size(); ++r) {
      os << "  row " << r << " const " << blk.rows[r].constant;
      for (const auto& [i, c] : blk.rows[r].terms) os << " " << i << ":" << c;
      os << "\n";
    }
  }
  os << "objective";
  for (int i = 0; i < n_vars_; ++i)
    if (objective_[static_cast<size_t>(i)] != 0.0)
      os << " " << i << ":" << objective_[static_cast<size_t>(i)];
  os << "\n";
}

std::vector<double> check_solution(const ConicProgram& prog, const Eigen::VectorXd& x) {
  if (x.size() != prog.num_vars()) throw std::invalid_argument("check_solution: wrong x length");
  std::vector<double> out;
  out.reserve(prog.blocks().size());
  for (const auto& blk : prog.blocks()) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(blk.rows.size()));
    for (size_t r = 0; r < blk.rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = blk.rows[r].eval(x);
    double viol = 0.0;
    switch (blk.cone) {
      case Cone::Zero:
        viol = std::abs(v[0]);
        break;
      case Cone::NonNeg:
        viol = std::max(0.0, -v[0]);
        break;
      case Cone::Soc:
        viol = std::max(0.0, v.tail(v.size() - 1).norm() - v[0]);
        break;
      case Cone::Exp: {
        const double xx = v[0], yy = v[1], zz = v[2];
        viol = std::max({0.0, -yy, -zz});
        if (yy > 1e-300) {
          viol = std::max(viol, yy * std::exp(xx / yy) - zz);
        } else {
          viol = std::max(viol, xx);  // boundary ray: x <= 0, z >= 0 when y = 0
        }
        break;
      }
    }
    out.push_back(viol);
  }
  return out;
}

}  // namespace uavrsma::conic
