#pragma once

#include <limits>
#include <vector>

#include "lmiproj/lmi.hpp"

namespace lmiproj {

// Douglas-Rachford iterate z = (y, x): y carries the decision coefficients,
// x the scaled-vech of the auxiliary matrix X coupled through F(y) = X.
struct DrState {
  Eigen::VectorXd y;
  Eigen::VectorXd x;
  int k = 0;
};

struct DrConfig {
  double sigma = 0.1;          // proximal weight trading pull toward yhat vs. the iterate
  int n_iter = 500;
  double early_stop_tol = 0.0; // stop when ||w - v|| <= tol; 0 disables
  bool record_residuals = false;
  bool strict = false;         // flag non-convergence at 10 * early_stop_tol
  bool warm_start = true;      // z0 = (yhat, L yhat + c); false: z0 = 0
};

struct DrResult {
  Eigen::VectorXd y_star;
  DrState final_state;
  std::vector<double> residuals;  // per-iteration ||w_k - v_k||, when recorded
  int iters_used = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  bool non_convergence = false;   // strict mode only; y_star is still returned
};

// Warm start on C1 at the network output: y0 = yhat, x0 = vech(F(yhat)).
DrState init_state(const LmiInstance& inst, const Eigen::VectorXd& yhat);

// Prox of ||y - yhat||^2 + I_C1 : solve the normal equations
//   y* = (I + L^T L)^{-1} (y_avg - L^T (c - xbar)),
//   y_avg = (2 sigma yhat + ybar) / (2 sigma + 1),  x* = L y* + c.
// The output lies on C1 exactly, so ivech(x*) is symmetric and equals F(y*).
DrState proj_c1(const LmiInstance& inst, const DrState& zbar, const Eigen::VectorXd& yhat,
                double sigma);

// Euclidean (Frobenius) projection onto the PSD cone in scaled-vech
// coordinates: eigenvalue clipping U max(0, Lambda) U^T.
Eigen::VectorXd proj_c2(const Eigen::VectorXd& xbar, int n);

// Full forward pass: z_{k+1} = z_k + v_{k+1} - w_{k+1} with
// w = proj_c1(z), v = proj_c2(2w - z); returns the y-part of
// proj_c1(z_final). Converges to argmin_{F(y)>=0} ||y - yhat|| as
// n_iter grows (nonempty feasible set assumed).
DrResult dr_project(const LmiInstance& inst, const Eigen::VectorXd& yhat, const DrConfig& cfg);

}  // namespace lmiproj
