#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmiproj/lmi.hpp"
#include "lmiproj/prng.hpp"

namespace lmiproj {

enum class ProblemKind { InvariantEllipsoid, Controller };

// Sign of the alpha P term in the invariant-ellipsoid LMI. The S-procedure
// derivation gives +alpha P (only that sign certifies invariance); Printed
// reproduces the -alpha P variant for comparison runs.
enum class SProcSign { Derivation, Printed };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::InvariantEllipsoid;
  double alpha = 0.1;       // S-procedure multiplier
  double epsilon = 1e-3;    // PD margin: P >= eps I / Q >= eps I
  SProcSign s_procedure_sign = SProcSign::Derivation;  // invariant problem only

  int feature_dim() const { return kind == ProblemKind::InvariantEllipsoid ? 6 : 7; }
  int decision_dim() const { return kind == ProblemKind::InvariantEllipsoid ? 3 : 5; }

  static ProblemSpec Invariant() { return ProblemSpec{}; }
  static ProblemSpec Controller() {
    ProblemSpec s;
    s.kind = ProblemKind::Controller;
    return s;
  }
};

// One instance of the invariant-ellipsoid family: xdot = A x + Bw w,
// A 2x2 symmetric Hurwitz.
struct SampleA {
  SymMatrix A;
  Eigen::Vector2d Bw;
  std::string split;  // train | ood-slow | ood-large
};

// One instance of the joint controller + ellipsoid family:
// xdot = A x + B u + Bw w, (A, B) stabilizable.
struct SampleB {
  SymMatrix A;
  Eigen::Vector2d B;
  Eigen::Vector2d Bw;
  std::string split;  // train | ood
};

std::vector<SampleA> gen_dataset_a(const std::string& split, int count, std::uint64_t seed);
std::vector<SampleB> gen_dataset_b(const std::string& split, int count, std::uint64_t seed);

// PBH test specialized to symmetric A: every eigenvalue >= 0 must have
// |v^T B| above threshold along its unit eigenvector.
bool check_stabilizable(const SymMatrix& A, const Eigen::Vector2d& B);

// Standard-form LMI for sample A: F(y) = blockdiag(-M(y), P(y) - eps I),
// M(y) = [[A^T P + P A + s alpha P, P Bw], [Bw^T P, -alpha I]], m = 3.
LmiInstance build_lmi_a(const SampleA& sample, const ProblemSpec& spec);

// Standard-form LMI for sample B with y = (vech_scaled(Q), vec(Y)), m = 5:
// F(y) = blockdiag(-[[QA^T + AQ + Y^T B^T + B Y + alpha Q, Bw], [Bw^T, -alpha I]],
//                  Q - eps I).
LmiInstance build_lmi_b(const SampleB& sample, const ProblemSpec& spec);

// K = Y Q^{-1}. Throws NumericalError (carrying lambda_min(Q)) on singular Q.
Eigen::RowVector2d recover_controller(const SymMatrix& Q, const Eigen::RowVector2d& Y);

// True iff A + B K has an eigenvalue with positive real part (closed-form
// 2x2 eigenvalues via trace/determinant; threshold exactly 0).
bool cl_unstable(const Eigen::Matrix2d& A, const Eigen::Vector2d& B,
                 const Eigen::RowVector2d& K);

enum class WPolicy { Zero, Sine, Worst };

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::Vector2d> x;
  bool diverged = false;
};

// RK4 integration of xdot = (A + B K) x + Bw w(t, x). Policies: Zero,
// Sine (w = sin(2 pi t)), Worst (w = sign(Bw^T P x)); all keep |w| <= 1.
// Truncates with the diverged flag when ||x|| exceeds 1e6.
Trajectory simulate_cl(const SampleB& sample, const Eigen::RowVector2d& K,
                       const Eigen::Vector2d& x0, WPolicy policy, double t_final, double dt,
                       const SymMatrix& P);

// Problem A: row-major A (4) then Bw (2). Problem B: unscaled upper-triangle
// vech of A (3), B (2), Bw (2).
Eigen::VectorXd encode_features(const SampleA& sample);
Eigen::VectorXd encode_features(const SampleB& sample);

// Points of {x : x^T M x = 1} for 2x2 PD M: M^{-1/2} (cos th, sin th).
std::vector<Eigen::Vector2d> ellipsoid_boundary(const SymMatrix& M, int n_pts);

// Decision-vector codecs (orthonormal scaled-vech basis).
SymMatrix decode_p(const Eigen::VectorXd& y);                              // problem A
std::pair<SymMatrix, Eigen::RowVector2d> decode_qy(const Eigen::VectorXd& y);  // problem B
Eigen::VectorXd encode_qy(const SymMatrix& Q, const Eigen::RowVector2d& Y);

struct Dataset {
  ProblemKind problem = ProblemKind::InvariantEllipsoid;
  std::uint64_t seed = 0;
  std::vector<SampleA> a;
  std::vector<SampleB> b;

  std::size_t size() const {
    return problem == ProblemKind::InvariantEllipsoid ? a.size() : b.size();
  }
  const std::string& split_of(std::size_t i) const {
    return problem == ProblemKind::InvariantEllipsoid ? a[i].split : b[i].split;
  }
};

Dataset make_dataset(ProblemKind problem, const std::string& split, int count,
                     std::uint64_t seed);

// JSON Lines: header {"problem", "seed", "count", "generator_version"},
// then one object per sample.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string problem_name(ProblemKind kind);
ProblemKind problem_from_name(const std::string& name);

}  // namespace lmiproj
