#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

namespace nozzle {

struct EigenOptions {
  int n_eigs = 1;
  double tol = 1e-8;  // relative Ritz residual
  int max_iter = 400;
  unsigned seed = 12345;
};

struct EigenResult {
  std::vector<double> values;           // descending
  std::vector<Eigen::VectorXd> vectors; // B-normalised
  int iterations = 0;
  double residual = 0.0;  // largest relative Ritz residual among the returned pairs
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Largest eigenvalues of A x = lambda B x with B sparse SPD and A symmetric,
// optionally restricted to { x : C^T x = 0 }. B is factored once (shift-invert
// at zero for the pencil (B, A)); Lanczos with full reorthogonalisation then
// runs on L^-1 A L^-T. Throws Numerical when the tolerance is not reached.
EigenResult largest_generalized(const LinearOperator& A, const Eigen::SparseMatrix<double>& B,
                                const EigenOptions& options = {}, const Eigen::MatrixXd* constraints = nullptr);

EigenResult largest_generalized(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                                const EigenOptions& options = {}, const Eigen::MatrixXd* constraints = nullptr);

double rayleigh_quotient(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                         const Eigen::VectorXd& x);

}  // namespace nozzle
