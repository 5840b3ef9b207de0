#include "lmiproj/sym_linalg.hpp"

#include <cmath>
#include <string>

namespace lmiproj {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionError("SymMatrix: input must be square with n >= 1");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw DimensionError("SymMatrix: input is not symmetric (max asymmetry " +
                         std::to_string(asym) + ")");
  m_ = 0.5 * (m + m.transpose());
}

Eigen::VectorXd vech_scaled(const SymMatrix& S) {
  const int n = S.n();
  Eigen::VectorXd v(vech_len(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) v[k++] = (i == j) ? S(i, j) : kSqrt2 * S(i, j);
  return v;
}

SymMatrix ivech_scaled(const Eigen::VectorXd& v, int n) {
  if (v.size() != vech_len(n))
    throw DimensionError("ivech_scaled: vector length " + std::to_string(v.size()) +
                         " does not match n = " + std::to_string(n));
  Eigen::MatrixXd m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double x = (i == j) ? v[k] : v[k] / kSqrt2;
      m(i, j) = x;
      m(j, i) = x;
      ++k;
    }
  return SymMatrix(m);
}

Spectrum sym_eig(const SymMatrix& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S.mat());
  if (es.info() != Eigen::Success)
    throw NumericalError("sym_eig: eigendecomposition did not converge");
  return Spectrum{es.eigenvalues(), es.eigenvectors()};
}

SpdFactor::SpdFactor(const Eigen::MatrixXd& M) : llt_(M) {
  if (llt_.info() != Eigen::Success)
    throw NumericalError("SpdFactor: matrix is not positive definite");
}

Eigen::VectorXd SpdFactor::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

Eigen::MatrixXd SpdFactor::solve_mat(const Eigen::MatrixXd& B) const { return llt_.solve(B); }

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  return SpdFactor(M).solve(b);
}

SymMatrix block_diag(const std::vector<SymMatrix>& blocks) {
  if (blocks.empty()) throw DimensionError("block_diag: empty block list");
  int n = 0;
  for (const auto& b : blocks) n += b.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    m.block(off, off, b.n(), b.n()) = b.mat();
    off += b.n();
  }
  return SymMatrix(m);
}

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
  if (n < 1) throw DimensionError("random_orthogonal: n must be >= 1");
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign correction makes the distribution Haar rather than QR-convention biased.
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace lmiproj
