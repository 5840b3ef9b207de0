#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmiproj/dr.hpp"
#include "lmiproj/implicit_grad.hpp"
#include "lmiproj/problems.hpp"

namespace lmiproj {

// Training aborted on a non-finite loss; carries the offending sample.
struct TrainDivergence : NumericalError {
  TrainDivergence(const std::string& msg, std::size_t index)
      : NumericalError(msg), sample_index(index) {}
  std::size_t sample_index;
};

struct MlpLayer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

// input -> 64 -> 64 -> output, rectifiers on the two hidden layers.
struct MlpParams {
  std::vector<MlpLayer> layers;

  int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().W.rows()); }

  // Uniform +-1/sqrt(fan_in) init from the run's seeded generator.
  static MlpParams Init(int in_dim, int out_dim, int hidden, Rng& rng);
};

using MlpGrads = std::vector<MlpLayer>;  // same shapes as the parameters

struct MlpCache {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> pre;  // pre-activations, one per layer
};

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& features,
                            MlpCache* cache = nullptr);
MlpGrads mlp_backward(const MlpParams& p, const MlpCache& cache,
                      const Eigen::VectorXd& grad_y);

MlpGrads zero_grads(const MlpParams& p);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpGrads m, v;
  long t = 0;
  AdamConfig cfg;

  static AdamState For(const MlpParams& p, const AdamConfig& cfg);
};

void adam_step(MlpParams& p, const MlpGrads& g, AdamState& state);

// Self-supervised objective c(y): problem A is -log det P(y) with gradient
// -vech_scaled(P^{-1}); problem B is +log det Q(y) with gradient
// +vech_scaled(Q^{-1}) on the Q coordinates. Eigenvalues below 1e-6 are
// clamped in both the value and the inverse (safe logdet).
std::pair<double, Eigen::VectorXd> objective_value_and_grad(const ProblemSpec& problem,
                                                            const Eigen::VectorXd& y);

// -beta * lambda_min(F(y)); gradient component i is -beta u^T F_i u for the
// minimum eigenvector u.
std::pair<double, Eigen::VectorXd> soft_penalty_and_grad(const LmiInstance& inst,
                                                         const Eigen::VectorXd& y,
                                                         double beta_soft);

enum class ModelKind { Soft, LmiNet };

std::string model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct TrainConfig {
  ModelKind model_kind = ModelKind::LmiNet;
  int epochs = 500;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta_soft = 100.0;
  double sigma = 0.1;
  int dr_iters_train = 500;
  std::uint64_t seed = 0;
  int hidden = 64;
};

struct EpochStats {
  double mean_loss = 0.0;
  double mean_violation = 0.0;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochStats> history;
};

// One compiled training sample: features plus its LMI instance.
struct TrainSample {
  Eigen::VectorXd features;
  LmiInstance inst;
};

using ObjectiveFn =
    std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd& y)>;

// Core minibatch Adam loop over compiled samples. Per-sample loss is
// c(y_out) - beta_soft lambda_min(F(y_out)), with y_out the raw network
// output (Soft) or its DR projection (LmiNet, gradients through the
// implicit VJP). Deterministic given (seed, config, samples).
TrainResult train_instances(const std::vector<TrainSample>& samples,
                            const ObjectiveFn& objective, const TrainConfig& cfg);

TrainResult train(const ProblemSpec& problem, const Dataset& data, const TrainConfig& cfg);

// Checkpoint: {"config", "feature_dim", "output_dim", "layers", "seed"};
// weights round-trip bit-exactly through the decimal encoding.
nlohmann::json checkpoint_to_json(const MlpParams& p, const TrainConfig& cfg);
std::pair<MlpParams, TrainConfig> checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const MlpParams& p, const TrainConfig& cfg, const std::string& path);
std::pair<MlpParams, TrainConfig> load_checkpoint(const std::string& path);

}  // namespace lmiproj
