#pragma once

#include "lmiproj/dr.hpp"

namespace lmiproj {

// Differential data of the PSD-cone projection at a point: the spectrum of
// the matrix entering the clip and the divided-difference coefficients
//   gamma_ij = (lam_i^+ - lam_j^+) / (lam_i - lam_j)   for separated pairs,
//   gamma_ij = 1 if lam_i > 0 else 0                   otherwise,
// with lam^+ = max(lam, 0). At a zero eigenvalue the entry is 0, the
// one-sided derivative from the infeasible side.
struct ClipDifferential {
  Spectrum spectrum;
  Eigen::MatrixXd gamma;
};

ClipDifferential clip_differential(const SymMatrix& Xbar);

// Directional derivative of the clip: vech(U (Gamma o (U^T H U)) U^T) with
// H = ivech(h). Linear and self-adjoint in h.
Eigen::VectorXd dproj_c2(const ClipDifferential& cd, const Eigen::VectorXd& h);

// Constant Jacobian blocks of proj_c1 (the map is affine):
// with M = (I + L^T L)^{-1},
//   dy*/dybar = M / (2s+1), dy*/dxbar = M L^T, dy*/dyhat = 2s M / (2s+1);
// x-block rows are L times the y-block rows.
struct ProjC1Jacobians {
  Eigen::MatrixXd dy_dybar;
  Eigen::MatrixXd dy_dxbar;
  Eigen::MatrixXd dy_dyhat;
};

ProjC1Jacobians dproj_c1(const LmiInstance& inst, double sigma);

// Jacobians of one DR iteration Phi(z, yhat) = z + P_C2(2 P_C1(z) - z) - P_C1(z),
// evaluated at the final iterate (dense; state dimension is small here).
struct PhiJacobians {
  Eigen::MatrixXd d_phi_dz;     // (m+t) x (m+t), t = n(n+1)/2
  Eigen::MatrixXd d_phi_dyhat;  // (m+t) x m
};

PhiJacobians assemble_phi_jacobians(const LmiInstance& inst, const DrState& z,
                                    const Eigen::VectorXd& yhat, double sigma);

struct VjpResult {
  Eigen::VectorXd grad;
  bool least_squares_fallback = false;  // (I - dPhi/dz) was singular
};

// v^T dy*/dyhat via the implicit function theorem at the DR fixed point:
// lift v through the final proj_c1, solve the adjoint system
// lambda^T (I - dPhi/dz) = r^T, return lambda^T dPhi/dyhat + direct term.
VjpResult backward_vjp(const LmiInstance& inst, const DrResult& result,
                       const Eigen::VectorXd& yhat, double sigma, const Eigen::VectorXd& v);

}  // namespace lmiproj
