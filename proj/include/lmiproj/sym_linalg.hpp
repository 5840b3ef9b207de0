#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "lmiproj/prng.hpp"

namespace lmiproj {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense symmetric matrix. Construction symmetrizes (M + M^T)/2, so
// entries(i,j) == entries(j,i) holds exactly afterwards; clearly
// non-symmetric input is rejected.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix Zero(int n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }
  static SymMatrix Identity(int n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

  int n() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
// orthonormal eigenvector columns.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

inline int vech_len(int n) { return n * (n + 1) / 2; }

// Isometric half-vectorization: diagonal copied, strict upper triangle
// scaled by sqrt(2), column-major over the upper triangle
// ((0,0),(0,1),(1,1),(0,2),...). ||vech_scaled(S)||_2 == ||S||_F, so
// Euclidean projections in the compressed coordinates are Frobenius
// projections of the full matrix.
Eigen::VectorXd vech_scaled(const SymMatrix& S);
SymMatrix ivech_scaled(const Eigen::VectorXd& v, int n);

Spectrum sym_eig(const SymMatrix& S);

// Cached Cholesky factorization of a symmetric positive-definite matrix,
// reusable across solves. Throws NumericalError if a pivot is not positive.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const Eigen::MatrixXd& M);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve_mat(const Eigen::MatrixXd& B) const;
  int dim() const { return static_cast<int>(llt_.matrixLLT().rows()); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& M, const Eigen::VectorXd& b);

SymMatrix block_diag(const std::vector<SymMatrix>& blocks);

// Haar-distributed orthogonal matrix: QR of an i.i.d. standard-normal
// matrix with the R-diagonal sign correction.
Eigen::MatrixXd random_orthogonal(int n, Rng& rng);

}  // namespace lmiproj
