#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "clap/nn.hpp"

namespace clap {

// Per-feature running mean/variance (Welford).
class RunningStats {
 public:
  explicit RunningStats(int dim = 0)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

  void observe(Eigen::Ref<const Eigen::VectorXd> x) {
    count_ += 1;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(x - mean_);
  }

  long long count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd variance() const {
    if (count_ < 2) return Eigen::VectorXd::Zero(mean_.size());
    return m2_ / static_cast<double>(count_);
  }
  Eigen::VectorXd stddev() const { return variance().cwiseSqrt(); }

  Eigen::VectorXd pack() const;  // serialization helpers
  static RunningStats unpack(Eigen::Ref<const Eigen::VectorXd> packed);

 private:
  Eigen::VectorXd mean_, m2_;
  long long count_ = 0;
};

struct RndConfig {
  int observation_size = 0;
  std::vector<int> hidden{128, 128};
  int feature_size = 64;
  AdamConfig adam;
};

// Fixed random target network and a trained predictor; the squared feature
// error is the exploration bonus. The target never changes after init.
struct RndPair {
  RndConfig config;
  MlpD target;
  MlpD predictor;
  AdamStateD predictor_adam;
  RunningStats observation_stats;
  RunningStats reward_stats;  // over raw novelty values, dim 1
};

RndPair make_rnd(const RndConfig& config, std::uint64_t seed);

// (x - mean) / max(stddev, 1e-8), clipped to [-5, 5].
Eigen::VectorXd normalize_observation(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation);

// Unnormalized ||predictor(s^) - target(s^)||^2.
double raw_novelty(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation);

// Novelty divided by the running standard deviation of novelty values.
double intrinsic_reward(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation);

void observe_observation(RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation);
void observe_novelty(RndPair& rnd, double raw);

// One Adam step on the mean squared feature error over the batch (columns);
// returns the pre-step loss. The target is untouched.
double update_predictor(RndPair& rnd, const Eigen::MatrixXd& observations);

void add_rnd_sections(CheckpointWriter& writer, const RndPair& rnd);
RndPair read_rnd_sections(const CheckpointReader& reader);

}  // namespace clap
