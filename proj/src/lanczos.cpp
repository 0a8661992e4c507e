#include "nozzle/lanczos.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <random>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

EigenResult largest_generalized(const LinearOperator& A, const Eigen::SparseMatrix<double>& B,
                                const EigenOptions& opt, const Eigen::MatrixXd* constraints) {
  using Eigen::VectorXd;
  const int n = static_cast<int>(B.rows());
  if (n == 0 || B.cols() != n) fail(ErrorKind::Domain, "eigenproblem needs a non-empty square pencil");
  if (opt.n_eigs < 1 || opt.max_iter < opt.n_eigs) fail(ErrorKind::Domain, "bad eigensolver options");

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(B);
  if (llt.info() != Eigen::Success) fail(ErrorKind::LinearSolver, "pencil matrix is not positive definite");
  // B = P^T L L^T P
  auto to_x = [&](const VectorXd& y) -> VectorXd {
    VectorXd w = llt.matrixU().solve(y);
    return llt.permutationPinv() * w;
  };
  auto op = [&](const VectorXd& y) -> VectorXd {
    VectorXd z = llt.permutationP() * A(to_x(y));
    return llt.matrixL().solve(z);
  };

  Eigen::MatrixXd Q;  // orthonormal basis of the excluded directions in y-space
  if (constraints && constraints->cols() > 0) {
    if (constraints->rows() != n) fail(ErrorKind::IncompatibleData, "constraint matrix has the wrong row count");
    Eigen::MatrixXd D(n, constraints->cols());
    for (int j = 0; j < constraints->cols(); ++j) {
      VectorXd c = llt.permutationP() * constraints->col(j);
      D.col(j) = llt.matrixL().solve(c);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-10);
    if (qr.rank() < D.cols()) fail(ErrorKind::IllPosedConstraint, "constraints are linearly dependent");
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, D.cols());
  }
  auto project = [&](VectorXd& v) {
    if (Q.cols() > 0) v -= Q * (Q.transpose() * v);
  };

  const int m_max = std::min(opt.max_iter, n - static_cast<int>(Q.cols()));
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> nd;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  project(v);
  v.normalize();

  std::vector<VectorXd> V{v};
  std::vector<double> alpha, beta;
  EigenResult res;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  bool done = false;
  for (int j = 0; j < m_max && !done; ++j) {
    VectorXd w = op(V[j]);
    project(w);
    const double a = V[j].dot(w);
    alpha.push_back(a);
    // Full reorthogonalisation, twice.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : V) w -= u.dot(w) * u;
    project(w);
    const double b = w.norm();
    const int m = j + 1;
    const bool last = m == m_max;
    if (m >= opt.n_eigs && (m % 5 == 0 || last || b < 1e-12 * std::abs(a))) {
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1)) : Eigen::VectorXd();
      tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      double worst = 0.0;
      for (int k = 0; k < opt.n_eigs; ++k) {
        const int idx = m - 1 - k;
        const double theta = tri.eigenvalues()[idx];
        const double r = std::abs(b * tri.eigenvectors()(m - 1, idx)) / std::max(std::abs(theta), 1e-300);
        worst = std::max(worst, r);
      }
      res.iterations = m;
      res.residual = worst;
      if (worst <= opt.tol || b < 1e-12 * std::abs(a) || last) {
        if (worst > opt.tol && !(b < 1e-12 * std::abs(a))) {
          std::ostringstream os;
          os << "Lanczos did not converge: residual " << worst << " after " << m << " iterations";
          fail(ErrorKind::Numerical, os.str());
        }
        for (int k = 0; k < opt.n_eigs; ++k) {
          const int idx = m - 1 - k;
          res.values.push_back(tri.eigenvalues()[idx]);
          VectorXd y = VectorXd::Zero(n);
          for (int i = 0; i < m; ++i) y += tri.eigenvectors()(i, idx) * V[i];
          res.vectors.push_back(to_x(y));
        }
        done = true;
        break;
      }
    }
    beta.push_back(b);
    V.push_back(w / b);
  }
  if (!done) fail(ErrorKind::Numerical, "Lanczos stopped without a result");
  return res;
}

EigenResult largest_generalized(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                                const EigenOptions& options, const Eigen::MatrixXd* constraints) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) fail(ErrorKind::IncompatibleData, "pencil sizes differ");
  return largest_generalized([&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; }, B, options,
                             constraints);
}

double rayleigh_quotient(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& B,
                         const Eigen::VectorXd& x) {
  const double den = x.dot(B * x);
  if (!(den > 0.0)) fail(ErrorKind::DegenerateInput, "field lies in the kernel of the denominator form");
  return x.dot(A * x) / den;
}

}  // namespace nozzle
