#pragma once

// Central finite-difference check of the complete training loss
// (policy + value + coverage + entropy) against the analytic gradients, on a
// miniature network. The inputs are arranged so no sample sits near a clip,
// ReLU or min() kink at the probe step size.

#include <Eigen/Core>

#include <vector>

#include "clap/policy.hpp"
#include "support/oracles.hpp"

namespace fdcheck {

struct Result {
  double max_rel_error = 0.0;
  int parameters = 0;
  bool margins_ok = false;  // all samples clear of non-differentiable points
};

inline Result policy_full_loss_check(std::uint64_t seed) {
  using namespace clap;

  PolicyConfig cfg;
  cfg.observation_size = 5;
  cfg.action_count = 6;
  cfg.objectives = 2;
  cfg.extractor_hidden = {8, 7};
  cfg.weight_hidden = {6, 5};
  cfg.critic_hidden = {5};
  cfg.kappa = 1.0;
  cfg.coverage = true;
  PolicyNet net = make_policy(cfg, seed);

  const int batch = 4;
  Rng rng(derive_seed(seed, 999));
  Eigen::MatrixXd obs(cfg.observation_size, batch);
  for (Eigen::Index i = 0; i < obs.size(); ++i) obs.data()[i] = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd cnorm(cfg.action_count, batch);
  for (Eigen::Index i = 0; i < cnorm.size(); ++i)
    cnorm.data()[i] = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.3, 0.6);
  BoolMatrix masks = BoolMatrix::Constant(cfg.action_count, batch, true);
  masks(1, 0) = false;
  masks(4, 2) = false;

  PpoLossConfig loss_cfg;
  loss_cfg.clip = 0.2;
  loss_cfg.value_coef = 0.5;
  loss_cfg.coverage_coef = 0.05;
  loss_cfg.entropy_coef = 0.01;

  const PolicyForward base = policy_forward(net, obs, cnorm, masks);
  Eigen::VectorXi actions(batch);
  for (int b = 0; b < batch; ++b) {
    int best = 0;
    for (int i = 1; i < cfg.action_count; ++i)
      if (base.probs(i, b) > base.probs(best, b)) best = i;
    actions[b] = best;
  }
  // Two ratios inside the clip band, two outside, all away from the edges.
  Eigen::VectorXd old_logp(batch);
  const double shifts[4] = {-0.1, 0.3, -0.35, 0.1};
  for (int b = 0; b < batch; ++b) old_logp[b] = base.log_probs(actions[b], b) + shifts[b];
  Eigen::VectorXd advantages(batch);
  advantages << 0.7, -0.4, 0.9, -0.6;
  Eigen::MatrixXd value_targets(2, batch);
  for (Eigen::Index i = 0; i < value_targets.size(); ++i) value_targets.data()[i] = rng.uniform(-1, 1);
  Eigen::VectorXd intrinsic_targets(batch);
  for (int b = 0; b < batch; ++b) intrinsic_targets[b] = rng.uniform(-1, 1);

  Result result;
  result.margins_ok = true;
  for (int b = 0; b < batch; ++b) {
    const double ratio = std::exp(base.log_probs(actions[b], b) - old_logp[b]);
    if (std::abs(ratio - (1.0 - loss_cfg.clip)) < 2e-2 || std::abs(ratio - (1.0 + loss_cfg.clip)) < 2e-2)
      result.margins_ok = false;
    for (int i = 0; i < cfg.action_count; ++i) {
      if (masks(i, b) && std::abs(base.probs(i, b) - cnorm(i, b)) < 5e-4) result.margins_ok = false;
    }
  }

  const auto loss = [&]() {
    const PolicyForward fwd = policy_forward(net, obs, cnorm, masks);
    return policy_loss_and_grads(net, fwd, actions, old_logp, advantages, value_targets,
                                 intrinsic_targets, loss_cfg, nullptr)
        .total;
  };

  PolicyGrads grads;
  policy_loss_and_grads(net, base, actions, old_logp, advantages, value_targets, intrinsic_targets,
                        loss_cfg, &grads);

  std::vector<std::pair<MlpD*, MlpGradsD*>> nets = {
      {&net.extractor, &grads.extractor},
      {&net.actor, &grads.actor},
      {&net.weight_actor, &grads.weight_actor},
      {&net.weight_cov, &grads.weight_cov},
      {&net.critics[0], &grads.critics[0]},
      {&net.critics[1], &grads.critics[1]},
      {&net.critic_intrinsic, &grads.critic_intrinsic},
  };
  for (auto& [mlp, grad] : nets) {
    std::vector<double> analytic;
    for (const auto& w : grad->weights)
      for (Eigen::Index i = 0; i < w.size(); ++i) analytic.push_back(w.data()[i]);
    for (const auto& b : grad->biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) analytic.push_back(b.data()[i]);
    const std::vector<double*> params = oracles::param_pointers(*mlp);
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double numeric = oracles::central_difference(params[k], loss, 1e-5);
      const double rel = std::abs(numeric - analytic[k]) /
                         std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
      result.max_rel_error = std::max(result.max_rel_error, rel);
      result.parameters += 1;
    }
  }
  return result;
}

}  // namespace fdcheck
