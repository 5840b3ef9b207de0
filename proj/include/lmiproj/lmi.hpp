#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmiproj/sym_linalg.hpp"

namespace lmiproj {

// A sample "violates" when violation(y) exceeds this; strict zero would
// count eigen-solver noise. Reported in every EvalReport.
constexpr double kViolationTol = 1e-9;

// Parameterized LMI in standard form F(y) = F0 + sum_i y_i F_i >= 0,
// together with its vectorized affine operator: column i of L is
// vech_scaled(F_i), c = vech_scaled(F0), and the constraint F(y) = X
// reads L y + c = x in scaled-vech coordinates. Immutable after Build;
// safe to share across threads.
struct LmiInstance {
  int n = 0;  // block dimension
  int m = 0;  // number of decision coefficients
  SymMatrix F0;
  std::vector<SymMatrix> F;
  Eigen::MatrixXd L;   // vech_len(n) x m
  Eigen::VectorXd c;   // vech_len(n)
  std::shared_ptr<const SpdFactor> normal_factor;  // I_m + L^T L, shared by
                                                   // all DR iterations and
                                                   // the backward pass

  static LmiInstance Build(const SymMatrix& F0, const std::vector<SymMatrix>& Fs);
};

SymMatrix eval_F(const LmiInstance& inst, const Eigen::VectorXd& y);

// max(0, -lambda_min(F(y))): zero iff F(y) is PSD up to solver tolerance.
double violation(const LmiInstance& inst, const Eigen::VectorXd& y);

nlohmann::json lmi_to_json(const LmiInstance& inst);
LmiInstance lmi_from_json(const nlohmann::json& j);

nlohmann::json sym_to_json(const SymMatrix& S);
SymMatrix sym_from_json(const nlohmann::json& j);

}  // namespace lmiproj
