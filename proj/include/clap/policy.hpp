#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

#include "clap/nn.hpp"
#include "clap/rng.hpp"
#include "clap/types.hpp"

namespace clap {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Per-episode histogram of selected action indices; the normalized form
// feeds the fusion layer and the coverage loss.
class CoverageVector {
 public:
  explicit CoverageVector(int actions) : counts_(Eigen::VectorXi::Zero(actions)) {}

  void add(int action_index) {
    if (action_index < 0 || action_index >= counts_.size())
      throw std::out_of_range("coverage index out of range");
    counts_[action_index] += 1;
  }

  void reset() { counts_.setZero(); }

  const Eigen::VectorXi& counts() const { return counts_; }
  int total() const { return counts_.sum(); }

  // C / max(1, sum C); scale-free across episode lengths.
  Eigen::VectorXd normalized() const {
    const int total_count = total();
    return counts_.cast<double>() / static_cast<double>(std::max(1, total_count));
  }

 private:
  Eigen::VectorXi counts_;
};

struct PolicyConfig {
  int observation_size = 0;
  int action_count = 0;
  int objectives = 2;
  std::vector<int> extractor_hidden{256, 256};
  std::vector<int> weight_hidden{256, 128};
  std::vector<int> critic_hidden{128};
  double kappa = 1.0;     // coverage scale in the fusion rule
  // Actor-side fusion gates live in [gate_floor, 1): a saturated sigmoid gate
  // multiplying a logit would otherwise zero both gradient paths and freeze
  // the preference between gated-off actions.
  double gate_floor = 0.1;
  bool coverage = true;   // false zeroes the coverage weight path entirely
};

// Shared extractor with actor, adaptive fusion weight learners, per-objective
// critic streams and an intrinsic critic stream.
struct PolicyNet {
  PolicyConfig config;
  MlpD extractor;
  MlpD actor;
  MlpD weight_actor;
  MlpD weight_cov;
  std::vector<MlpD> critics;
  MlpD critic_intrinsic;
};

PolicyNet make_policy(const PolicyConfig& config, std::uint64_t seed);

// fused_i = sigma(Phi_actor(s))_i * logit_i - kappa * sigma(Phi_c(s))_i * cnorm_i.
// The weight nets already apply the sigmoid as their output activation.
Eigen::VectorXd fuse(Eigen::Ref<const Eigen::VectorXd> logits, Eigen::Ref<const Eigen::VectorXd> actor_weights,
                     Eigen::Ref<const Eigen::VectorXd> coverage_weights,
                     Eigen::Ref<const Eigen::VectorXd> coverage_norm, double kappa);

// Softmax restricted to available actions; masked entries get probability
// exactly zero. Throws on an all-false mask.
Eigen::VectorXd masked_distribution(Eigen::Ref<const Eigen::VectorXd> fused, const MaskArray& mask);

// (action index, log-probability) drawn from the distribution.
std::pair<int, double> sample_action(Eigen::Ref<const Eigen::VectorXd> probs, Rng& rng);

int greedy_action(Eigen::Ref<const Eigen::VectorXd> fused, const MaskArray& mask);

// sum_i min(probs_i, cnorm_i); the overlap between the current policy and the
// episode's selection history.
double coverage_loss(Eigen::Ref<const Eigen::VectorXd> probs, Eigen::Ref<const Eigen::VectorXd> coverage_norm);

struct PolicyEval {
  Eigen::VectorXd probs;
  Eigen::VectorXd log_probs;  // -inf on masked entries
  Eigen::VectorXd fused;
  Eigen::VectorXd values;     // one per objective
  double value_intrinsic = 0.0;
};

// Single forward pass through the shared extractor feeding every head.
PolicyEval evaluate(const PolicyNet& net, Eigen::Ref<const Eigen::VectorXd> observation,
                    const CoverageVector& coverage, const MaskArray& mask);

// ---------------------------------------------------------------------------
// Batched training path.
// ---------------------------------------------------------------------------

struct PolicyForward {
  Eigen::MatrixXd coverage_norms;    // A x B input snapshot
  Eigen::MatrixXd features, logits, actor_weights, coverage_weights, fused;
  Eigen::MatrixXd probs, log_probs;  // A x B; log_probs is -inf off-mask
  Eigen::MatrixXd values;            // objectives x B
  Eigen::VectorXd value_intrinsic;   // B
  ForwardCacheD extractor_cache, actor_cache, weight_actor_cache, weight_cov_cache, intrinsic_cache;
  std::vector<ForwardCacheD> critic_caches;
};

PolicyForward policy_forward(const PolicyNet& net, const Eigen::MatrixXd& observations,
                             const Eigen::MatrixXd& coverage_norms, const BoolMatrix& masks);

struct PolicyGrads {
  MlpGradsD extractor, actor, weight_actor, weight_cov;
  std::vector<MlpGradsD> critics;
  MlpGradsD critic_intrinsic;
};

struct PpoLossConfig {
  double clip = 0.2;
  double value_coef = 0.5;
  double coverage_coef = 0.01;
  double entropy_coef = 0.01;
};

struct LossReport {
  double policy = 0.0;
  double value = 0.0;
  double coverage = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

// Clipped-ratio policy loss plus value, coverage and entropy terms over one
// minibatch; returns the losses and exact gradients of the scalar total.
LossReport policy_loss_and_grads(const PolicyNet& net, const PolicyForward& fwd,
                                 const Eigen::VectorXi& actions, Eigen::Ref<const Eigen::VectorXd> old_log_probs,
                                 Eigen::Ref<const Eigen::VectorXd> advantages,
                                 const Eigen::MatrixXd& value_targets,
                                 Eigen::Ref<const Eigen::VectorXd> intrinsic_targets, const PpoLossConfig& cfg,
                                 PolicyGrads* grads);

// One Adam state per sub-network; stepped together.
struct PolicyAdam {
  AdamStateD extractor, actor, weight_actor, weight_cov;
  std::vector<AdamStateD> critics;
  AdamStateD critic_intrinsic;
};

PolicyAdam make_policy_adam(const PolicyNet& net, const AdamConfig& config);
void policy_adam_step(PolicyNet& net, const PolicyGrads& grads, PolicyAdam& adam);

void add_policy_sections(CheckpointWriter& writer, const PolicyNet& net);
PolicyNet read_policy_sections(const CheckpointReader& reader);

}  // namespace clap
