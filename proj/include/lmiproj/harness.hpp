#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmiproj/neural.hpp"

namespace lmiproj {

struct PerSampleRecord {
  double violation = 0.0;
  bool unstable = false;  // controller problem only
  double wall_ms = 0.0;   // feature encoding + MLP + projection
};

struct EvalReport {
  std::string model_tag;
  std::string dataset_tag;
  int dr_iters = 0;  // 0 = raw model output (no projection)
  double violation_fraction = 0.0;
  double cl_unstable_fraction = 0.0;  // meaningful for the controller problem
  double ms_per_sample = 0.0;
  double violation_threshold = kViolationTol;
  std::vector<PerSampleRecord> per_sample;
};

using Predictor = std::function<Eigen::VectorXd(const Eigen::VectorXd& features)>;

Predictor mlp_predictor(const MlpParams& params);

// Per-sample: encode, predict, optionally project with dr_iters iterations
// (nullopt = raw output), then measure violation and, for the controller
// problem, closed-loop instability of K = Y Q^{-1}. threads > 1 parallelizes
// over samples (identical per-sample results; wall times only).
EvalReport evaluate(const Predictor& predict, const ProblemSpec& problem, const Dataset& data,
                    std::optional<int> dr_iters, double sigma, const std::string& model_tag,
                    const std::string& dataset_tag, int threads = 1);

// Single-threaded ms/sample: first 10 samples warm up (excluded), then the
// median of 3 full-dataset passes on a monotonic clock.
double timing_protocol(const std::function<void(std::size_t)>& per_sample, std::size_t count);

struct RunConfig {
  ProblemKind problem = ProblemKind::InvariantEllipsoid;
  std::map<std::string, std::string> dataset_paths;  // split -> path (optional)
  std::map<std::string, int> split_counts;           // used when generating
  TrainConfig train;
  std::vector<int> eval_dr_iters = {500, 1000, 2000, 3000, 4000};
  std::string out_dir;
  std::uint64_t seed = 0;
};

// Trains both model kinds and evaluates each on every split at raw output
// plus every configured DR setting; writes datasets (when generated),
// checkpoints, CSV/JSON reports, and a summary table under out_dir.
std::vector<EvalReport> run_experiment(const RunConfig& cfg);

void write_report_csv(const std::string& path, const std::vector<EvalReport>& reports);
std::vector<EvalReport> read_report_csv(const std::string& path);
void write_report_json(const std::string& path, const EvalReport& report);
EvalReport read_report_json(const std::string& path);

// Fixed ordering (model, split, dr_iters); footer carries the violation
// threshold.
std::string summary_table(std::vector<EvalReport> reports, ProblemKind problem);

std::vector<int> default_eval_dr_iters();

}  // namespace lmiproj
