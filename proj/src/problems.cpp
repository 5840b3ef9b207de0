#include "lmiproj/problems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lmiproj {

namespace {

constexpr const char* kGeneratorVersion = "1";
constexpr double kPbhTol = 1e-8;
constexpr double kDivergenceNorm = 1e6;

// Orthonormal basis of S^2 under the Frobenius inner product: preimages of
// the scaled-vech unit vectors.
SymMatrix sym_basis2(int j) { return ivech_scaled(Eigen::Vector3d::Unit(j), 2); }

// [[T, u], [u^T, s]] as a symmetric 3x3 block.
SymMatrix corner_block(const Eigen::Matrix2d& T, const Eigen::Vector2d& u, double s) {
  Eigen::Matrix3d m;
  m.topLeftCorner<2, 2>() = T;
  m.topRightCorner<2, 1>() = u;
  m.bottomLeftCorner<1, 2>() = u.transpose();
  m(2, 2) = s;
  return SymMatrix(m);
}

struct SplitParamsA {
  double lam_min, lam_max, sigma_bw;
};

SplitParamsA split_params_a(const std::string& split) {
  if (split == "train") return {0.5, 5.0, 1.0};
  if (split == "ood-slow") return {0.05, 0.5, 1.0};
  if (split == "ood-large") return {0.5, 5.0, 3.0};
  throw std::invalid_argument("unknown invariant-problem split: " + split);
}

}  // namespace

std::vector<SampleA> gen_dataset_a(const std::string& split, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("gen_dataset_a: count must be >= 1");
  const SplitParamsA p = split_params_a(split);
  Rng rng(seed);
  std::vector<SampleA> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    const double l1 = rng.uniform(-p.lam_max, -p.lam_min);
    const double l2 = rng.uniform(-p.lam_max, -p.lam_min);
    const Eigen::MatrixXd U = random_orthogonal(2, rng);
    const Eigen::Matrix2d A =
        U * Eigen::Vector2d(l1, l2).asDiagonal() * U.transpose();
    Eigen::Vector2d Bw(p.sigma_bw * rng.normal(), p.sigma_bw * rng.normal());
    out.push_back(SampleA{SymMatrix(A), Bw, split});
  }
  return out;
}

bool check_stabilizable(const SymMatrix& A, const Eigen::Vector2d& B) {
  const Spectrum spec = sym_eig(A);
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues[i] < 0.0) continue;
    const double coupling = std::abs(spec.eigenvectors.col(i).dot(B));
    if (coupling <= kPbhTol) return false;
  }
  return true;
}

std::vector<SampleB> gen_dataset_b(const std::string& split, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("gen_dataset_b: count must be >= 1");
  const bool ood = split == "ood";
  if (!ood && split != "train")
    throw std::invalid_argument("unknown controller-problem split: " + split);
  const double mag_lo = ood ? 0.3 : 0.1;
  const double mag_hi = ood ? 1.5 : 1.0;
  Rng rng(seed);
  std::vector<SampleB> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    const double m1 = rng.uniform(mag_lo, mag_hi);
    const double m2 = rng.uniform(mag_lo, mag_hi);
    double l1, l2;
    if (ood) {
      // Exactly one unstable eigenvalue.
      const bool first_positive = rng.uniform01() < 0.5;
      l1 = first_positive ? m1 : -m1;
      l2 = first_positive ? -m2 : m2;
    } else {
      l1 = rng.uniform01() < 0.5 ? m1 : -m1;
      l2 = rng.uniform01() < 0.5 ? m2 : -m2;
    }
    const Eigen::MatrixXd U = random_orthogonal(2, rng);
    const Eigen::Matrix2d A =
        U * Eigen::Vector2d(l1, l2).asDiagonal() * U.transpose();
    const Eigen::Vector2d B(rng.normal(), rng.normal());
    const Eigen::Vector2d Bw(rng.normal(), rng.normal());
    SampleB s{SymMatrix(A), B, Bw, split};
    if (!check_stabilizable(s.A, s.B)) continue;
    out.push_back(std::move(s));
  }
  return out;
}

LmiInstance build_lmi_a(const SampleA& sample, const ProblemSpec& spec) {
  const double s = spec.s_procedure_sign == SProcSign::Derivation ? 1.0 : -1.0;
  const Eigen::Matrix2d A = sample.A.mat();
  const Eigen::Matrix2d Z2 = Eigen::Matrix2d::Zero();

  // F0: P = 0 leaves -M(0) = diag(0, 0, alpha) and P - eps I = -eps I.
  const SymMatrix F0 = block_diag(
      {corner_block(Z2, Eigen::Vector2d::Zero(), spec.alpha),
       SymMatrix(-spec.epsilon * Eigen::Matrix2d::Identity())});

  std::vector<SymMatrix> Fs;
  for (int j = 0; j < 3; ++j) {
    const SymMatrix Ej = sym_basis2(j);
    const Eigen::Matrix2d dM = A.transpose() * Ej.mat() + Ej.mat() * A + s * spec.alpha * Ej.mat();
    Fs.push_back(block_diag({corner_block(-dM, -(Ej.mat() * sample.Bw), 0.0), Ej}));
  }
  return LmiInstance::Build(F0, Fs);
}

LmiInstance build_lmi_b(const SampleB& sample, const ProblemSpec& spec) {
  const Eigen::Matrix2d A = sample.A.mat();
  const Eigen::Matrix2d Z2 = Eigen::Matrix2d::Zero();

  // Q = 0, Y = 0: -M(0) = [[0, -Bw], [-Bw^T, alpha]].
  const SymMatrix F0 =
      block_diag({corner_block(Z2, -sample.Bw, spec.alpha),
                  SymMatrix(-spec.epsilon * Eigen::Matrix2d::Identity())});

  std::vector<SymMatrix> Fs;
  for (int j = 0; j < 3; ++j) {
    const SymMatrix Ej = sym_basis2(j);
    const Eigen::Matrix2d dM =
        Ej.mat() * A.transpose() + A * Ej.mat() + spec.alpha * Ej.mat();
    Fs.push_back(block_diag({corner_block(-dM, Eigen::Vector2d::Zero(), 0.0), Ej}));
  }
  for (int k = 0; k < 2; ++k) {
    const Eigen::Vector2d ek = Eigen::Vector2d::Unit(k);
    const Eigen::Matrix2d dM =
        ek * sample.B.transpose() + sample.B * ek.transpose();
    Fs.push_back(block_diag({corner_block(-dM, Eigen::Vector2d::Zero(), 0.0), SymMatrix::Zero(2)}));
  }
  return LmiInstance::Build(F0, Fs);
}

Eigen::RowVector2d recover_controller(const SymMatrix& Q, const Eigen::RowVector2d& Y) {
  const Spectrum spec = sym_eig(Q);
  const double lam_min = spec.eigenvalues[0];
  const double lam_max_abs = spec.eigenvalues.cwiseAbs().maxCoeff();
  if (spec.eigenvalues.cwiseAbs().minCoeff() <= 1e-14 * std::max(1.0, lam_max_abs)) {
    std::ostringstream msg;
    msg << "recover_controller: Q is singular (lambda_min = " << lam_min << ")";
    throw NumericalError(msg.str());
  }
  return (Q.mat().partialPivLu().solve(Y.transpose())).transpose();
}

bool cl_unstable(const Eigen::Matrix2d& A, const Eigen::Vector2d& B,
                 const Eigen::RowVector2d& K) {
  const Eigen::Matrix2d Acl = A + B * K;
  const double tr = Acl.trace();
  const double det = Acl.determinant();
  const double disc = tr * tr - 4.0 * det;
  const double max_re = disc >= 0.0 ? 0.5 * (tr + std::sqrt(disc)) : 0.5 * tr;
  return max_re > 0.0;
}

Trajectory simulate_cl(const SampleB& sample, const Eigen::RowVector2d& K,
                       const Eigen::Vector2d& x0, WPolicy policy, double t_final, double dt,
                       const SymMatrix& P) {
  if (dt <= 0.0 || t_final < dt)
    throw std::invalid_argument("simulate_cl: need dt > 0 and t_final >= dt");
  const Eigen::Matrix2d Acl = sample.A.mat() + sample.B * K;
  const Eigen::Matrix2d Pm = P.mat();

  const auto w_of = [&](double t, const Eigen::Vector2d& x) -> double {
    switch (policy) {
      case WPolicy::Zero: return 0.0;
      case WPolicy::Sine: return std::sin(2.0 * M_PI * t);
      case WPolicy::Worst: {
        const double s = sample.Bw.dot(Pm * x);
        return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
      }
    }
    return 0.0;
  };
  const auto f = [&](double t, const Eigen::Vector2d& x) -> Eigen::Vector2d {
    return Acl * x + sample.Bw * w_of(t, x);
  };

  const int steps = static_cast<int>(std::llround(t_final / dt));
  Trajectory traj;
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  Eigen::Vector2d x = x0;
  traj.t.push_back(0.0);
  traj.x.push_back(x);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Eigen::Vector2d k1 = f(t, x);
    const Eigen::Vector2d k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Eigen::Vector2d k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Eigen::Vector2d k4 = f(t + dt, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    traj.t.push_back((k + 1) * dt);
    traj.x.push_back(x);
    if (x.norm() > kDivergenceNorm) {
      traj.diverged = true;
      break;
    }
  }
  return traj;
}

Eigen::VectorXd encode_features(const SampleA& sample) {
  Eigen::VectorXd f(6);
  f << sample.A(0, 0), sample.A(0, 1), sample.A(1, 0), sample.A(1, 1), sample.Bw[0],
      sample.Bw[1];
  return f;
}

Eigen::VectorXd encode_features(const SampleB& sample) {
  Eigen::VectorXd f(7);
  f << sample.A(0, 0), sample.A(0, 1), sample.A(1, 1), sample.B[0], sample.B[1],
      sample.Bw[0], sample.Bw[1];
  return f;
}

std::vector<Eigen::Vector2d> ellipsoid_boundary(const SymMatrix& M, int n_pts) {
  if (M.n() != 2) throw DimensionError("ellipsoid_boundary: M must be 2x2");
  if (n_pts < 1) throw std::invalid_argument("ellipsoid_boundary: n_pts must be >= 1");
  const Spectrum spec = sym_eig(M);
  if (spec.eigenvalues[0] <= 0.0)
    throw NumericalError("ellipsoid_boundary: M is not positive definite");
  const Eigen::Matrix2d inv_sqrt =
      spec.eigenvectors * spec.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
      spec.eigenvectors.transpose();
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(n_pts);
  for (int k = 0; k < n_pts; ++k) {
    const double th = 2.0 * M_PI * k / n_pts;
    pts.push_back(inv_sqrt * Eigen::Vector2d(std::cos(th), std::sin(th)));
  }
  return pts;
}

SymMatrix decode_p(const Eigen::VectorXd& y) { return ivech_scaled(y, 2); }

std::pair<SymMatrix, Eigen::RowVector2d> decode_qy(const Eigen::VectorXd& y) {
  if (y.size() != 5) throw DimensionError("decode_qy: y must have length 5");
  return {ivech_scaled(y.head(3), 2), Eigen::RowVector2d(y[3], y[4])};
}

Eigen::VectorXd encode_qy(const SymMatrix& Q, const Eigen::RowVector2d& Y) {
  Eigen::VectorXd y(5);
  y.head(3) = vech_scaled(Q);
  y[3] = Y[0];
  y[4] = Y[1];
  return y;
}

Dataset make_dataset(ProblemKind problem, const std::string& split, int count,
                     std::uint64_t seed) {
  Dataset ds;
  ds.problem = problem;
  ds.seed = seed;
  if (problem == ProblemKind::InvariantEllipsoid)
    ds.a = gen_dataset_a(split, count, seed);
  else
    ds.b = gen_dataset_b(split, count, seed);
  return ds;
}

std::string problem_name(ProblemKind kind) {
  return kind == ProblemKind::InvariantEllipsoid ? "invariant" : "controller";
}

ProblemKind problem_from_name(const std::string& name) {
  if (name == "invariant") return ProblemKind::InvariantEllipsoid;
  if (name == "controller") return ProblemKind::Controller;
  throw std::invalid_argument("unknown problem: " + name);
}

namespace {

nlohmann::json vec2_to_json(const Eigen::Vector2d& v) {
  return nlohmann::json::array({nlohmann::json::array({v[0]}), nlohmann::json::array({v[1]})});
}

Eigen::Vector2d vec2_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected 2x1 column JSON");
  return Eigen::Vector2d(j[0][0].get<double>(), j[1][0].get<double>());
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  nlohmann::json header;
  header["problem"] = problem_name(ds.problem);
  header["seed"] = ds.seed;
  header["count"] = ds.size();
  header["generator_version"] = kGeneratorVersion;
  out << header.dump() << "\n";
  if (ds.problem == ProblemKind::InvariantEllipsoid) {
    for (const auto& s : ds.a) {
      nlohmann::json j;
      j["A"] = sym_to_json(s.A);
      j["Bw"] = vec2_to_json(s.Bw);
      j["split"] = s.split;
      out << j.dump() << "\n";
    }
  } else {
    for (const auto& s : ds.b) {
      nlohmann::json j;
      j["A"] = sym_to_json(s.A);
      j["B"] = vec2_to_json(s.B);
      j["Bw"] = vec2_to_json(s.Bw);
      j["split"] = s.split;
      out << j.dump() << "\n";
    }
  }
  if (!out) throw std::invalid_argument("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty dataset file: " + path);
  const nlohmann::json header = nlohmann::json::parse(line);
  Dataset ds;
  ds.problem = problem_from_name(header.at("problem").get<std::string>());
  ds.seed = header.at("seed").get<std::uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (ds.problem == ProblemKind::InvariantEllipsoid) {
      ds.a.push_back(SampleA{sym_from_json(j.at("A")), vec2_from_json(j.at("Bw")),
                             j.at("split").get<std::string>()});
    } else {
      ds.b.push_back(SampleB{sym_from_json(j.at("A")), vec2_from_json(j.at("B")),
                             vec2_from_json(j.at("Bw")), j.at("split").get<std::string>()});
    }
  }
  const auto declared = header.at("count").get<std::size_t>();
  if (ds.size() != declared)
    throw std::invalid_argument("dataset sample count does not match header");
  return ds;
}

}  // namespace lmiproj
