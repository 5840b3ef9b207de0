#include "lmiproj/implicit_grad.hpp"

#include <string>

namespace lmiproj {

ClipDifferential clip_differential(const SymMatrix& Xbar) {
  ClipDifferential cd;
  cd.spectrum = sym_eig(Xbar);
  const int n = Xbar.n();
  const Eigen::VectorXd& lam = cd.spectrum.eigenvalues;
  cd.gamma.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double di = lam[i], dj = lam[j];
      if (std::abs(di - dj) > 1e-12)
        cd.gamma(i, j) = (std::max(di, 0.0) - std::max(dj, 0.0)) / (di - dj);
      else
        cd.gamma(i, j) = di > 0.0 ? 1.0 : 0.0;
    }
  return cd;
}

Eigen::VectorXd dproj_c2(const ClipDifferential& cd, const Eigen::VectorXd& h) {
  const int n = static_cast<int>(cd.gamma.rows());
  const SymMatrix H = ivech_scaled(h, n);
  const Eigen::MatrixXd& U = cd.spectrum.eigenvectors;
  const Eigen::MatrixXd inner = U.transpose() * H.mat() * U;
  const Eigen::MatrixXd out = U * cd.gamma.cwiseProduct(inner) * U.transpose();
  return vech_scaled(SymMatrix(out));
}

ProjC1Jacobians dproj_c1(const LmiInstance& inst, double sigma) {
  const Eigen::MatrixXd M =
      inst.normal_factor->solve_mat(Eigen::MatrixXd::Identity(inst.m, inst.m));
  ProjC1Jacobians j;
  j.dy_dybar = M / (2.0 * sigma + 1.0);
  j.dy_dxbar = M * inst.L.transpose();
  j.dy_dyhat = (2.0 * sigma / (2.0 * sigma + 1.0)) * M;
  return j;
}

PhiJacobians assemble_phi_jacobians(const LmiInstance& inst, const DrState& z,
                                    const Eigen::VectorXd& yhat, double sigma) {
  const int m = inst.m;
  const int t = vech_len(inst.n);
  const int d = m + t;

  const ProjC1Jacobians j1 = dproj_c1(inst, sigma);

  Eigen::MatrixXd J1z(d, d);
  J1z.topLeftCorner(m, m) = j1.dy_dybar;
  J1z.topRightCorner(m, t) = j1.dy_dxbar;
  J1z.bottomLeftCorner(t, m) = inst.L * j1.dy_dybar;
  J1z.bottomRightCorner(t, t) = inst.L * j1.dy_dxbar;

  Eigen::MatrixXd J1y(d, m);
  J1y.topRows(m) = j1.dy_dyhat;
  J1y.bottomRows(t) = inst.L * j1.dy_dyhat;

  // Clip differential at the reflection point the iteration actually visits.
  const DrState w = proj_c1(inst, z, yhat, sigma);
  const Eigen::VectorXd rx = 2.0 * w.x - z.x;
  const ClipDifferential cd = clip_differential(ivech_scaled(rx, inst.n));

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
  D.topLeftCorner(m, m).setIdentity();  // Pi_C2 leaves y untouched
  for (int j = 0; j < t; ++j)
    D.block(m, m, t, t).col(j) = dproj_c2(cd, Eigen::VectorXd::Unit(t, j));

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  PhiJacobians out;
  out.d_phi_dz = I + D * (2.0 * J1z - I) - J1z;
  out.d_phi_dyhat = 2.0 * D * J1y - J1y;
  return out;
}

VjpResult backward_vjp(const LmiInstance& inst, const DrResult& result,
                       const Eigen::VectorXd& yhat, double sigma, const Eigen::VectorXd& v) {
  if (v.size() != inst.m)
    throw DimensionError("backward_vjp: v has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(inst.m));
  const int m = inst.m;
  const int t = vech_len(inst.n);

  const ProjC1Jacobians j1 = dproj_c1(inst, sigma);
  const PhiJacobians phi = assemble_phi_jacobians(inst, result.final_state, yhat, sigma);

  // y* = Pi_m(proj_c1(z_f, yhat)): lift v to [v^T 0] through the final prox.
  const Eigen::VectorXd direct = j1.dy_dyhat.transpose() * v;
  Eigen::VectorXd r(m + t);
  r.head(m) = j1.dy_dybar.transpose() * v;
  r.tail(t) = j1.dy_dxbar.transpose() * v;

  const Eigen::MatrixXd At =
      (Eigen::MatrixXd::Identity(m + t, m + t) - phi.d_phi_dz).transpose();
  VjpResult out;
  Eigen::VectorXd lambda;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(At);
  if (lu.isInvertible()) {
    lambda = lu.solve(r);
  } else {
    // Nonsmooth clip points can make the adjoint system singular.
    lambda = At.completeOrthogonalDecomposition().solve(r);
    out.least_squares_fallback = true;
  }
  out.grad = direct + phi.d_phi_dyhat.transpose() * lambda;
  return out;
}

}  // namespace lmiproj
