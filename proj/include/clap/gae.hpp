#pragma once

#include <Eigen/Core>

#include "clap/types.hpp"

namespace clap {

// Generalized advantage estimation: the (gamma * lambda)-discounted sum of TD
// errors, truncated at episode boundaries (terminal[t] marks the last step of
// an episode).
inline Eigen::VectorXd gae(Eigen::Ref<const Eigen::VectorXd> deltas, double gamma, double lambda,
                           const ArrayXb& terminal) {
  const Eigen::Index n = deltas.size();
  Eigen::VectorXd advantages(n);
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    if (terminal[t]) running = 0.0;
    running = deltas[t] + gamma * lambda * running;
    advantages[t] = running;
  }
  return advantages;
}

// Discounted return targets: G_t = r_t + gamma * G_{t+1} within an episode;
// the step after a truncated (non-terminal) tail bootstraps from `bootstrap`.
inline Eigen::VectorXd discounted_returns(Eigen::Ref<const Eigen::VectorXd> rewards, double gamma,
                                          const ArrayXb& terminal, double bootstrap) {
  const Eigen::Index n = rewards.size();
  Eigen::VectorXd returns(n);
  double running = bootstrap;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    if (terminal[t]) running = 0.0;
    running = rewards[t] + gamma * running;
    returns[t] = running;
  }
  return returns;
}

}  // namespace clap
