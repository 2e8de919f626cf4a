#pragma once

#include <Eigen/Dense>

namespace corrmon::linalg {

/// Eigenvalues of a symmetric matrix, largest first (lambda_1 >= ... >= lambda_M).
Eigen::VectorXd eigenvalues_descending(const Eigen::MatrixXd& sym);

double min_eigenvalue(const Eigen::MatrixXd& sym);
double max_eigenvalue(const Eigen::MatrixXd& sym);

/// Largest absolute entry.
double max_abs(const Eigen::MatrixXd& m);

/// Copy of `m` without row and column `i`.
Eigen::MatrixXd remove_index(const Eigen::MatrixXd& m, Eigen::Index i);

/// Column `i` of `m` with entry `i` dropped.
Eigen::VectorXd column_without(const Eigen::MatrixXd& m, Eigen::Index i);

}  // namespace corrmon::linalg
