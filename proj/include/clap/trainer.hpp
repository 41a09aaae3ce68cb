#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "clap/env.hpp"
#include "clap/policy.hpp"
#include "clap/rnd.hpp"
#include "clap/rollout.hpp"
#include "clap/scalarize.hpp"

namespace clap {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  Scalarization mode = Scalarization::Chebyshev;
  Eigen::VectorXd weights;  // empty -> uniform over objectives

  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 64;
  int horizon = 2048;
  long long total_steps = 100000;

  double intrinsic_coef = 0.5;   // c_int in the combined advantage
  double coverage_coef = 0.01;   // c_cov on the coverage loss
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double tau = 1.0;              // utopian offset
  double kappa = 1.0;            // coverage fusion scale
  double learning_rate = 3e-4;

  bool coverage = true;              // fusion coverage path + aux loss
  bool cheby_literal_sign = false;   // keep the raw distance as the critic scalar
  std::uint64_t seed = 0;
  int warmup_steps = -1;             // -1 -> horizon; initializes RND stats and the utopian point
  long long checkpoint_every = 0;    // extra checkpoints every N steps; 0 -> final only

  std::vector<int> extractor_hidden{256, 256};
  std::vector<int> weight_hidden{256, 128};
  std::vector<int> critic_hidden{128};
  std::vector<int> rnd_hidden{128, 128};
  int rnd_features = 64;
};

// Deterministic "key=value" lines; echoed as the effective-config banner and
// as comment headers in output CSVs.
std::string describe(const TrainConfig& config);

Eigen::VectorXd effective_weights(const TrainConfig& config, int objectives);

struct MetricsRow {
  long long step = 0;
  double episode_return_obj1 = 0, episode_return_obj2 = 0;
  double episode_len = 0;
  double success_rate = 0;
  double repeat_fraction = 0;
  double intrinsic_mean = 0;
  double policy_loss = 0, value_loss = 0, coverage_loss = 0;
  double z1 = 0, z2 = 0;
};

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows,
                       const std::string& config_banner);

struct TrainResult {
  PolicyNet policy;
  RndPair rnd;
  UtopianTracker utopia{1, 1.0};
  std::vector<MetricsRow> metrics;
  std::filesystem::path checkpoint_path;  // empty when no out_dir given
};

// Advantage and value-target computation for a full buffer.
struct UpdateTargets {
  Eigen::VectorXd advantages;        // normalized combined advantage
  Eigen::MatrixXd value_targets;     // objectives x T discounted returns
  Eigen::VectorXd intrinsic_targets; // T
};

UpdateTargets compute_targets(const RolloutBuffer& buffer, Eigen::Ref<const Eigen::VectorXd> bootstrap_values,
                              double bootstrap_intrinsic, const UtopianTracker& utopia,
                              const TrainConfig& config, Eigen::Ref<const Eigen::VectorXd> weights);

// PPO-clip epochs over shuffled minibatches plus the RND predictor update on
// the same observations. Returns minibatch-mean losses.
LossReport ppo_update(PolicyNet& policy, RndPair& rnd, PolicyAdam& adam, const RolloutBuffer& buffer,
                      const UpdateTargets& targets, const TrainConfig& config, Rng& shuffle_rng);

// Algorithm: rollout collection, per-objective + intrinsic GAE through the
// scalarized critic, PPO updates, utopian tracking, metrics and checkpoints.
TrainResult train(MoEnv& env, const TrainConfig& config, const std::filesystem::path& out_dir = {});

struct EvalReport {
  Eigen::VectorXd mean_return;
  double mean_actions_to_goal = 0;   // failed episodes count their full length
  double mean_privilege_gains = 0;
  double success_rate = 0;
  int episodes = 0;
};

// Greedy (argmax over masked fused logits) rollouts; deterministic in seed.
EvalReport evaluate_policy(const PolicyNet& policy, MoEnv& env, int episodes, std::uint64_t seed);

// Uniform-random masked baseline under the same protocol.
EvalReport evaluate_random(MoEnv& env, int episodes, std::uint64_t seed);

struct Checkpoint {
  PolicyNet policy;
  RndPair rnd;
  UtopianTracker utopia{1, 1.0};
};

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& policy, const RndPair& rnd,
                     const UtopianTracker& utopia);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string format_csv_value(double v);

}  // namespace clap
