#include "lmiproj/neural.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace lmiproj {

namespace {
constexpr double kLogdetClamp = 1e-6;

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

// Subgradient at 0 taken as 0.
Eigen::VectorXd relu_mask(const Eigen::VectorXd& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}
}  // namespace

MlpParams MlpParams::Init(int in_dim, int out_dim, int hidden, Rng& rng) {
  const auto init_layer = [&rng](int rows, int cols) {
    MlpLayer l;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    l.W.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) l.W(i, j) = rng.uniform(-bound, bound);
    l.b.resize(rows);
    for (int i = 0; i < rows; ++i) l.b[i] = rng.uniform(-bound, bound);
    return l;
  };
  MlpParams p;
  p.layers.push_back(init_layer(hidden, in_dim));
  p.layers.push_back(init_layer(hidden, hidden));
  p.layers.push_back(init_layer(out_dim, hidden));
  return p;
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& features,
                            MlpCache* cache) {
  if (features.size() != p.input_dim())
    throw DimensionError("mlp_forward: feature length " + std::to_string(features.size()) +
                         " does not match input dim " + std::to_string(p.input_dim()));
  if (cache) {
    cache->input = features;
    cache->pre.clear();
  }
  Eigen::VectorXd h = features;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    Eigen::VectorXd pre = p.layers[l].W * h + p.layers[l].b;
    if (cache) cache->pre.push_back(pre);
    h = (l + 1 < p.layers.size()) ? relu(pre) : pre;
  }
  return h;
}

MlpGrads zero_grads(const MlpParams& p) {
  MlpGrads g;
  for (const auto& l : p.layers)
    g.push_back(MlpLayer{Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                         Eigen::VectorXd::Zero(l.b.size())});
  return g;
}

MlpGrads mlp_backward(const MlpParams& p, const MlpCache& cache,
                      const Eigen::VectorXd& grad_y) {
  const std::size_t L = p.layers.size();
  if (cache.pre.size() != L) throw DimensionError("mlp_backward: cache does not match params");
  MlpGrads g = zero_grads(p);
  Eigen::VectorXd delta = grad_y;
  for (std::size_t l = L; l-- > 0;) {
    const Eigen::VectorXd act_in =
        l == 0 ? cache.input : relu(cache.pre[l - 1]);
    g[l].W = delta * act_in.transpose();
    g[l].b = delta;
    if (l > 0)
      delta = (p.layers[l].W.transpose() * delta).cwiseProduct(relu_mask(cache.pre[l - 1]));
  }
  return g;
}

AdamState AdamState::For(const MlpParams& p, const AdamConfig& cfg) {
  AdamState s;
  s.m = zero_grads(p);
  s.v = zero_grads(p);
  s.t = 0;
  s.cfg = cfg;
  return s;
}

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& state) {
  state.t += 1;
  const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    state.m[l].W = b1 * state.m[l].W + (1.0 - b1) * g[l].W;
    state.m[l].b = b1 * state.m[l].b + (1.0 - b1) * g[l].b;
    state.v[l].W = b2 * state.v[l].W + (1.0 - b2) * g[l].W.cwiseProduct(g[l].W);
    state.v[l].b = b2 * state.v[l].b + (1.0 - b2) * g[l].b.cwiseProduct(g[l].b);
    p.layers[l].W.array() -= state.cfg.lr * (state.m[l].W.array() / corr1) /
                             ((state.v[l].W.array() / corr2).sqrt() + state.cfg.eps);
    p.layers[l].b.array() -= state.cfg.lr * (state.m[l].b.array() / corr1) /
                             ((state.v[l].b.array() / corr2).sqrt() + state.cfg.eps);
  }
}

namespace {

// Safe logdet of a symmetric matrix: clamp eigenvalues below delta in both
// the value and the inverse used by the gradient.
std::pair<double, SymMatrix> safe_logdet(const SymMatrix& S) {
  const Spectrum spec = sym_eig(S);
  const Eigen::VectorXd lam = spec.eigenvalues.cwiseMax(kLogdetClamp);
  const double value = lam.array().log().sum();
  const Eigen::MatrixXd inv =
      spec.eigenvectors * lam.cwiseInverse().asDiagonal() * spec.eigenvectors.transpose();
  return {value, SymMatrix(inv)};
}

}  // namespace

std::pair<double, Eigen::VectorXd> objective_value_and_grad(const ProblemSpec& problem,
                                                            const Eigen::VectorXd& y) {
  if (y.size() != problem.decision_dim())
    throw DimensionError("objective_value_and_grad: y length does not match problem");
  if (problem.kind == ProblemKind::InvariantEllipsoid) {
    const auto [logdet, inv] = safe_logdet(decode_p(y));
    return {-logdet, -vech_scaled(inv)};
  }
  const auto [Q, Y] = decode_qy(y);
  (void)Y;
  const auto [logdet, inv] = safe_logdet(Q);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(5);
  grad.head(3) = vech_scaled(inv);
  return {logdet, grad};
}

std::pair<double, Eigen::VectorXd> soft_penalty_and_grad(const LmiInstance& inst,
                                                         const Eigen::VectorXd& y,
                                                         double beta_soft) {
  if (beta_soft < 0.0) throw std::invalid_argument("soft_penalty_and_grad: beta_soft < 0");
  const Spectrum spec = sym_eig(eval_F(inst, y));
  const double lam_min = spec.eigenvalues[0];
  const Eigen::VectorXd u = spec.eigenvectors.col(0);
  Eigen::VectorXd grad(inst.m);
  for (int i = 0; i < inst.m; ++i) grad[i] = -beta_soft * u.dot(inst.F[i].mat() * u);
  return {-beta_soft * lam_min, grad};
}

std::string model_kind_name(ModelKind k) { return k == ModelKind::Soft ? "soft" : "lmi-net"; }

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "soft") return ModelKind::Soft;
  if (name == "lmi-net") return ModelKind::LmiNet;
  throw std::invalid_argument("unknown model kind: " + name);
}

TrainResult train_instances(const std::vector<TrainSample>& samples,
                            const ObjectiveFn& objective, const TrainConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("train: dataset is empty");
  if (cfg.model_kind == ModelKind::LmiNet && cfg.dr_iters_train < 1)
    throw std::invalid_argument("train: dr_iters_train must be >= 1 for lmi-net");
  if (cfg.beta_soft < 0.0) throw std::invalid_argument("train: beta_soft must be >= 0");

  Rng rng(cfg.seed);
  const int in_dim = static_cast<int>(samples.front().features.size());
  const int out_dim = samples.front().inst.m;
  MlpParams params = MlpParams::Init(in_dim, out_dim, cfg.hidden, rng);
  AdamState adam = AdamState::For(params, AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});

  DrConfig dr;
  dr.sigma = cfg.sigma;
  dr.n_iter = cfg.dr_iters_train;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult out;
  out.history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run's generator: deterministic shuffles.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }

    double loss_sum = 0.0, viol_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      MlpGrads batch = zero_grads(params);
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t si = order[bi];
        const TrainSample& s = samples[si];
        MlpCache cache;
        const Eigen::VectorXd yhat = mlp_forward(params, s.features, &cache);

        Eigen::VectorXd y_out = yhat;
        DrResult proj;
        if (cfg.model_kind == ModelKind::LmiNet) {
          proj = dr_project(s.inst, yhat, dr);
          y_out = proj.y_star;
        }

        const auto [obj, obj_grad] = objective(y_out);
        const auto [pen, pen_grad] = soft_penalty_and_grad(s.inst, y_out, cfg.beta_soft);
        const double loss = obj + pen;
        if (!std::isfinite(loss))
          throw TrainDivergence("train: non-finite loss at sample " + std::to_string(si), si);
        loss_sum += loss;
        viol_sum += violation(s.inst, y_out);

        Eigen::VectorXd grad_yhat = obj_grad + pen_grad;
        if (cfg.model_kind == ModelKind::LmiNet)
          grad_yhat = backward_vjp(s.inst, proj, yhat, cfg.sigma, grad_yhat).grad;

        const MlpGrads g = mlp_backward(params, cache, grad_yhat);
        for (std::size_t l = 0; l < batch.size(); ++l) {
          batch[l].W += g[l].W;
          batch[l].b += g[l].b;
        }
      }
      const double inv_bs = 1.0 / static_cast<double>(stop - start);
      for (auto& l : batch) {
        l.W *= inv_bs;
        l.b *= inv_bs;
      }
      adam_step(params, batch, adam);
    }
    out.history.push_back(EpochStats{loss_sum / static_cast<double>(samples.size()),
                                     viol_sum / static_cast<double>(samples.size())});
  }
  out.params = std::move(params);
  return out;
}

TrainResult train(const ProblemSpec& problem, const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
  std::vector<TrainSample> samples;
  samples.reserve(data.size());
  if (problem.kind == ProblemKind::InvariantEllipsoid) {
    for (const auto& s : data.a)
      samples.push_back(TrainSample{encode_features(s), build_lmi_a(s, problem)});
  } else {
    for (const auto& s : data.b)
      samples.push_back(TrainSample{encode_features(s), build_lmi_b(s, problem)});
  }
  const ObjectiveFn objective = [&problem](const Eigen::VectorXd& y) {
    return objective_value_and_grad(problem, y);
  };
  return train_instances(samples, objective, cfg);
}

namespace {

nlohmann::json train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["model_kind"] = model_kind_name(c.model_kind);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["beta_soft"] = c.beta_soft;
  j["sigma"] = c.sigma;
  j["dr_iters_train"] = c.dr_iters_train;
  j["hidden"] = c.hidden;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.model_kind = model_kind_from_name(j.at("model_kind").get<std::string>());
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta_soft = j.at("beta_soft").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.dr_iters_train = j.at("dr_iters_train").get<int>();
  c.hidden = j.value("hidden", 64);
  return c;
}

}  // namespace

nlohmann::json checkpoint_to_json(const MlpParams& p, const TrainConfig& cfg) {
  nlohmann::json j;
  j["config"] = train_config_to_json(cfg);
  j["feature_dim"] = p.input_dim();
  j["output_dim"] = p.output_dim();
  j["seed"] = cfg.seed;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) {
    nlohmann::json lj;
    nlohmann::json w = nlohmann::json::array();
    for (int i = 0; i < l.W.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < l.W.cols(); ++k) row.push_back(l.W(i, k));
      w.push_back(row);
    }
    lj["w"] = w;
    nlohmann::json b = nlohmann::json::array();
    for (int i = 0; i < l.b.size(); ++i) b.push_back(l.b[i]);
    lj["b"] = b;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

std::pair<MlpParams, TrainConfig> checkpoint_from_json(const nlohmann::json& j) {
  TrainConfig cfg = train_config_from_json(j.at("config"));
  cfg.seed = j.at("seed").get<std::uint64_t>();
  MlpParams p;
  for (const auto& lj : j.at("layers")) {
    MlpLayer l;
    const auto& w = lj.at("w");
    const int rows = static_cast<int>(w.size());
    const int cols = static_cast<int>(w[0].size());
    l.W.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) l.W(i, k) = w[i][k].get<double>();
    const auto& b = lj.at("b");
    l.b.resize(static_cast<int>(b.size()));
    for (int i = 0; i < l.b.size(); ++i) l.b[i] = b[i].get<double>();
    p.layers.push_back(std::move(l));
  }
  if (p.layers.empty()) throw std::invalid_argument("checkpoint has no layers");
  if (p.input_dim() != j.at("feature_dim").get<int>() ||
      p.output_dim() != j.at("output_dim").get<int>())
    throw DimensionError("checkpoint dims do not match layer shapes");
  return {std::move(p), cfg};
}

void save_checkpoint(const MlpParams& p, const TrainConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << checkpoint_to_json(p, cfg).dump(2) << "\n";
  if (!out) throw std::invalid_argument("write failed: " + path);
}

std::pair<MlpParams, TrainConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace lmiproj
