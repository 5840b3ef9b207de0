#include "lmiproj/dr.hpp"

#include <cmath>
#include <string>

namespace lmiproj {

DrState init_state(const LmiInstance& inst, const Eigen::VectorXd& yhat) {
  if (yhat.size() != inst.m)
    throw DimensionError("init_state: yhat has length " + std::to_string(yhat.size()) +
                         ", expected " + std::to_string(inst.m));
  DrState z;
  z.y = yhat;
  z.x = inst.L * yhat + inst.c;  // vech(F(yhat)): z0 lies on C1
  z.k = 0;
  return z;
}

DrState proj_c1(const LmiInstance& inst, const DrState& zbar, const Eigen::VectorXd& yhat,
                double sigma) {
  if (zbar.y.size() != inst.m || zbar.x.size() != inst.L.rows() || yhat.size() != inst.m)
    throw DimensionError("proj_c1: state dimensions do not match the instance");
  const Eigen::VectorXd y_avg = (2.0 * sigma * yhat + zbar.y) / (2.0 * sigma + 1.0);
  DrState w;
  w.y = inst.normal_factor->solve(y_avg - inst.L.transpose() * (inst.c - zbar.x));
  w.x = inst.L * w.y + inst.c;
  w.k = zbar.k;
  return w;
}

Eigen::VectorXd proj_c2(const Eigen::VectorXd& xbar, int n) {
  const SymMatrix X = ivech_scaled(xbar, n);
  const Spectrum spec = sym_eig(X);
  const Eigen::VectorXd clipped = spec.eigenvalues.cwiseMax(0.0);
  const Eigen::MatrixXd proj =
      spec.eigenvectors * clipped.asDiagonal() * spec.eigenvectors.transpose();
  return vech_scaled(SymMatrix(proj));
}

DrResult dr_project(const LmiInstance& inst, const Eigen::VectorXd& yhat, const DrConfig& cfg) {
  if (cfg.n_iter < 1) throw DimensionError("dr_project: n_iter must be >= 1");
  if (cfg.sigma <= 0.0) throw DimensionError("dr_project: sigma must be positive");

  DrState z;
  if (cfg.warm_start) {
    z = init_state(inst, yhat);
  } else {
    z.y = Eigen::VectorXd::Zero(inst.m);
    z.x = Eigen::VectorXd::Zero(inst.L.rows());
  }

  DrResult res;
  if (cfg.record_residuals) res.residuals.reserve(cfg.n_iter);

  double residual = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < cfg.n_iter; ++k) {
    const DrState w = proj_c1(inst, z, yhat, cfg.sigma);
    // Reflection 2w - z; C2 leaves the y-part untouched and clips the x-part.
    const Eigen::VectorXd ry = 2.0 * w.y - z.y;
    const Eigen::VectorXd rx = 2.0 * w.x - z.x;
    const Eigen::VectorXd vx = proj_c2(rx, inst.n);
    residual = std::sqrt((w.y - ry).squaredNorm() + (w.x - vx).squaredNorm());

    z.y += ry - w.y;
    z.x += vx - w.x;
    z.k = k + 1;
    res.iters_used = k + 1;
    if (cfg.record_residuals) res.residuals.push_back(residual);
    if (cfg.early_stop_tol > 0.0 && residual <= cfg.early_stop_tol) break;
  }

  res.final_state = z;
  res.y_star = proj_c1(inst, z, yhat, cfg.sigma).y;
  res.final_residual = residual;
  res.non_convergence =
      cfg.strict && cfg.early_stop_tol > 0.0 && !(residual <= 10.0 * cfg.early_stop_tol);
  return res;
}

}  // namespace lmiproj
