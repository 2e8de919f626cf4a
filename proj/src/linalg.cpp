#include "corrmon/linalg.hpp"

namespace corrmon::linalg {

Eigen::VectorXd eigenvalues_descending(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(sym.rows() - 1);
}

double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd remove_index(const Eigen::MatrixXd& m, Eigen::Index i) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Eigen::Index r = 0, ro = 0; r < n; ++r) {
    if (r == i) continue;
    for (Eigen::Index c = 0, co = 0; c < n; ++c) {
      if (c == i) continue;
      out(ro, co++) = m(r, c);
    }
    ++ro;
  }
  return out;
}

Eigen::VectorXd column_without(const Eigen::MatrixXd& m, Eigen::Index i) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd out(n - 1);
  for (Eigen::Index r = 0, ro = 0; r < n; ++r) {
    if (r != i) out(ro++) = m(r, i);
  }
  return out;
}

}  // namespace corrmon::linalg
