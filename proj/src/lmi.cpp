#include "lmiproj/lmi.hpp"

#include <string>

namespace lmiproj {

LmiInstance LmiInstance::Build(const SymMatrix& F0, const std::vector<SymMatrix>& Fs) {
  if (Fs.empty()) throw DimensionError("LmiInstance: need at least one basis matrix");
  const int n = F0.n();
  for (const auto& Fi : Fs)
    if (Fi.n() != n)
      throw DimensionError("LmiInstance: basis matrix dimension " + std::to_string(Fi.n()) +
                           " does not match F0 dimension " + std::to_string(n));
  LmiInstance inst;
  inst.n = n;
  inst.m = static_cast<int>(Fs.size());
  inst.F0 = F0;
  inst.F = Fs;
  inst.c = vech_scaled(F0);
  inst.L.resize(vech_len(n), inst.m);
  for (int i = 0; i < inst.m; ++i) inst.L.col(i) = vech_scaled(Fs[i]);
  const Eigen::MatrixXd normal =
      Eigen::MatrixXd::Identity(inst.m, inst.m) + inst.L.transpose() * inst.L;
  inst.normal_factor = std::make_shared<SpdFactor>(normal);
  return inst;
}

SymMatrix eval_F(const LmiInstance& inst, const Eigen::VectorXd& y) {
  if (y.size() != inst.m)
    throw DimensionError("eval_F: y has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(inst.m));
  Eigen::MatrixXd acc = inst.F0.mat();
  for (int i = 0; i < inst.m; ++i) acc += y[i] * inst.F[i].mat();
  return SymMatrix(acc);
}

double violation(const LmiInstance& inst, const Eigen::VectorXd& y) {
  const Spectrum spec = sym_eig(eval_F(inst, y));
  return std::max(0.0, -spec.eigenvalues[0]);
}

nlohmann::json sym_to_json(const SymMatrix& S) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < S.n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < S.n(); ++j) row.push_back(S(i, j));
    rows.push_back(row);
  }
  return rows;
}

SymMatrix sym_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw DimensionError("matrix JSON must be a nonempty array");
  const int n = static_cast<int>(j.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
      throw DimensionError("matrix JSON rows must all have length n");
    for (int k = 0; k < n; ++k) m(i, k) = j[i][k].get<double>();
  }
  return SymMatrix(m);
}

nlohmann::json lmi_to_json(const LmiInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["m"] = inst.m;
  j["F0"] = sym_to_json(inst.F0);
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& Fi : inst.F) fs.push_back(sym_to_json(Fi));
  j["F"] = fs;
  return j;
}

LmiInstance lmi_from_json(const nlohmann::json& j) {
  const SymMatrix F0 = sym_from_json(j.at("F0"));
  std::vector<SymMatrix> Fs;
  for (const auto& fj : j.at("F")) Fs.push_back(sym_from_json(fj));
  LmiInstance inst = LmiInstance::Build(F0, Fs);
  if (j.contains("n") && j["n"].get<int>() != inst.n)
    throw DimensionError("LMI JSON: declared n does not match F0");
  if (j.contains("m") && j["m"].get<int>() != inst.m)
    throw DimensionError("LMI JSON: declared m does not match basis count");
  return inst;
}

}  // namespace lmiproj
