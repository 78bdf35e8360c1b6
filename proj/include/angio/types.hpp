#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace angio {

using Vector    = Eigen::VectorXd;
using Matrix    = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;
using SpMat     = Eigen::SparseMatrix<double>;
using Triplet   = Eigen::Triplet<double>;

// The spatial dimension is 2 or 3 at runtime. Fixed maximum sizes keep the
// small per-cell objects on the stack.
using SmallMat   = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using SmallVec   = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
// Gradients of the dim+1 barycentric basis functions, one per column.
using BasisGrads = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 4>;

}  // namespace angio
