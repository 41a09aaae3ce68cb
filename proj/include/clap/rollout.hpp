#pragma once

#include <Eigen/Core>

#include "clap/policy.hpp"
#include "clap/types.hpp"

namespace clap {

// On-policy transition storage for one update; cleared after each PPO update.
class RolloutBuffer {
 public:
  RolloutBuffer(int observation_size, int action_count, int objectives, int capacity)
      : observations(observation_size, capacity),
        coverage_norms(action_count, capacity),
        masks(action_count, capacity),
        actions(capacity),
        log_probs(capacity),
        rewards(objectives, capacity),
        intrinsic(capacity),
        values(objectives, capacity),
        value_intrinsic(capacity),
        dones(capacity),
        capacity_(capacity) {}

  void push(Eigen::Ref<const Eigen::VectorXd> observation, Eigen::Ref<const Eigen::VectorXd> coverage_norm,
            const MaskArray& mask, int action, double log_prob, Eigen::Ref<const Eigen::VectorXd> reward,
            double intrinsic_reward, Eigen::Ref<const Eigen::VectorXd> value, double value_int, bool done) {
    observations.col(size_) = observation;
    coverage_norms.col(size_) = coverage_norm;
    masks.col(size_) = mask;
    actions[size_] = action;
    log_probs[size_] = log_prob;
    rewards.col(size_) = reward;
    intrinsic[size_] = intrinsic_reward;
    values.col(size_) = value;
    value_intrinsic[size_] = value_int;
    dones[size_] = done;
    size_ += 1;
  }

  void clear() { size_ = 0; }
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  bool full() const { return size_ == capacity_; }

  Eigen::MatrixXd observations;
  Eigen::MatrixXd coverage_norms;
  BoolMatrix masks;
  Eigen::VectorXi actions;
  Eigen::VectorXd log_probs;
  Eigen::MatrixXd rewards;
  Eigen::VectorXd intrinsic;
  Eigen::MatrixXd values;
  Eigen::VectorXd value_intrinsic;
  ArrayXb dones;

 private:
  int size_ = 0;
  int capacity_ = 0;
};

}  // namespace clap
