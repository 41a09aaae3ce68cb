#include "clap/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace clap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> with_ends(const std::vector<int>& hidden, int in, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

std::vector<Activation> relu_stack(std::size_t hidden, Activation last) {
  std::vector<Activation> acts(hidden, Activation::Relu);
  acts.push_back(last);
  return acts;
}

// Columnwise masked softmax; fills probs and log_probs (kNegInf off-mask).
void masked_softmax_columns(const Eigen::MatrixXd& fused, const BoolMatrix& masks, Eigen::MatrixXd& probs,
                            Eigen::MatrixXd& log_probs) {
  const Eigen::Index rows = fused.rows();
  const Eigen::Index cols = fused.cols();
  probs.setZero(rows, cols);
  log_probs.setConstant(rows, cols, kNegInf);
  for (Eigen::Index b = 0; b < cols; ++b) {
    double max_fused = kNegInf;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (masks(i, b) && fused(i, b) > max_fused) max_fused = fused(i, b);
    }
    if (max_fused == kNegInf) throw std::invalid_argument("masked_distribution: no available action");
    double z = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (masks(i, b)) z += std::exp(fused(i, b) - max_fused);
    }
    const double log_z = std::log(z);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (masks(i, b)) {
        log_probs(i, b) = fused(i, b) - max_fused - log_z;
        probs(i, b) = std::exp(log_probs(i, b));
      }
    }
  }
}

}  // namespace

PolicyNet make_policy(const PolicyConfig& config, std::uint64_t seed) {
  if (config.observation_size <= 0 || config.action_count <= 0 || config.objectives <= 0)
    throw std::invalid_argument("policy config: sizes must be positive");
  if (config.extractor_hidden.empty())
    throw std::invalid_argument("policy config: extractor needs at least one hidden layer");
  if (config.gate_floor < 0.0 || config.gate_floor >= 1.0)
    throw std::invalid_argument("policy config: gate floor must lie in [0, 1)");
  PolicyNet net;
  net.config = config;
  const std::vector<int> extractor_sizes = with_ends(
      std::vector<int>(config.extractor_hidden.begin(), config.extractor_hidden.end() - 1),
      config.observation_size, config.extractor_hidden.back());
  net.extractor = make_mlp<double>(extractor_sizes,
                                   std::vector<Activation>(config.extractor_hidden.size(), Activation::Relu),
                                   derive_seed(seed, 10));
  const int feature_size = config.extractor_hidden.back();
  net.actor = make_mlp<double>({feature_size, config.action_count}, {Activation::Identity},
                               derive_seed(seed, 11));
  const auto weight_sizes = with_ends(config.weight_hidden, feature_size, config.action_count);
  net.weight_actor = make_mlp<double>(weight_sizes, relu_stack(config.weight_hidden.size(), Activation::Sigmoid),
                                      derive_seed(seed, 12));
  net.weight_cov = make_mlp<double>(weight_sizes, relu_stack(config.weight_hidden.size(), Activation::Sigmoid),
                                    derive_seed(seed, 13));
  const auto critic_sizes = with_ends(config.critic_hidden, feature_size, 1);
  for (int o = 0; o < config.objectives; ++o) {
    net.critics.push_back(make_mlp<double>(
        critic_sizes, relu_stack(config.critic_hidden.size(), Activation::Identity),
        derive_seed(seed, 14 + static_cast<std::uint64_t>(o))));
  }
  net.critic_intrinsic = make_mlp<double>(
      critic_sizes, relu_stack(config.critic_hidden.size(), Activation::Identity), derive_seed(seed, 30));
  return net;
}

Eigen::VectorXd fuse(Eigen::Ref<const Eigen::VectorXd> logits, Eigen::Ref<const Eigen::VectorXd> actor_weights,
                     Eigen::Ref<const Eigen::VectorXd> coverage_weights,
                     Eigen::Ref<const Eigen::VectorXd> coverage_norm, double kappa) {
  return (actor_weights.array() * logits.array() -
          kappa * coverage_weights.array() * coverage_norm.array())
      .matrix();
}

Eigen::VectorXd masked_distribution(Eigen::Ref<const Eigen::VectorXd> fused, const MaskArray& mask) {
  Eigen::MatrixXd probs, log_probs;
  BoolMatrix masks(mask.size(), 1);
  masks.col(0) = mask;
  masked_softmax_columns(fused, masks, probs, log_probs);
  return probs.col(0);
}

std::pair<int, double> sample_action(Eigen::Ref<const Eigen::VectorXd> probs, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = static_cast<int>(i);
    if (u < cumulative) return {last_positive, std::log(probs[i])};
  }
  // Rounding left u just above the cumulative sum; fall back to the last
  // positive-probability entry.
  if (last_positive < 0) throw std::invalid_argument("sample_action: degenerate distribution");
  return {last_positive, std::log(probs[last_positive])};
}

int greedy_action(Eigen::Ref<const Eigen::VectorXd> fused, const MaskArray& mask) {
  int best = -1;
  double best_value = kNegInf;
  for (Eigen::Index i = 0; i < fused.size(); ++i) {
    if (mask[i] && fused[i] > best_value) {
      best_value = fused[i];
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::invalid_argument("greedy_action: no available action");
  return best;
}

double coverage_loss(Eigen::Ref<const Eigen::VectorXd> probs, Eigen::Ref<const Eigen::VectorXd> coverage_norm) {
  if (probs.size() != coverage_norm.size())
    throw std::invalid_argument("coverage_loss: length mismatch");
  return probs.cwiseMin(coverage_norm).sum();
}

PolicyEval evaluate(const PolicyNet& net, Eigen::Ref<const Eigen::VectorXd> observation,
                    const CoverageVector& coverage, const MaskArray& mask) {
  const Eigen::MatrixXd obs = observation;
  const Eigen::MatrixXd features = forward(net.extractor, obs);
  PolicyEval out;
  const Eigen::VectorXd logits = forward(net.actor, features);
  const Eigen::VectorXd wa =
      net.config.gate_floor +
      ((1.0 - net.config.gate_floor) * forward(net.weight_actor, features)).array();
  const Eigen::VectorXd wc = net.config.coverage
                                 ? Eigen::VectorXd(forward(net.weight_cov, features))
                                 : Eigen::VectorXd(Eigen::VectorXd::Zero(net.config.action_count));
  out.fused = fuse(logits, wa, wc, coverage.normalized(), net.config.kappa);
  Eigen::MatrixXd probs, log_probs;
  BoolMatrix masks(mask.size(), 1);
  masks.col(0) = mask;
  masked_softmax_columns(out.fused, masks, probs, log_probs);
  out.probs = probs.col(0);
  out.log_probs = log_probs.col(0);
  out.values.resize(net.config.objectives);
  for (int o = 0; o < net.config.objectives; ++o)
    out.values[o] = forward(net.critics[static_cast<std::size_t>(o)], features)(0, 0);
  out.value_intrinsic = forward(net.critic_intrinsic, features)(0, 0);
  return out;
}

PolicyForward policy_forward(const PolicyNet& net, const Eigen::MatrixXd& observations,
                             const Eigen::MatrixXd& coverage_norms, const BoolMatrix& masks) {
  PolicyForward fwd;
  fwd.coverage_norms = coverage_norms;
  fwd.features = forward(net.extractor, observations, &fwd.extractor_cache);
  fwd.logits = forward(net.actor, fwd.features, &fwd.actor_cache);
  fwd.actor_weights =
      (net.config.gate_floor +
       ((1.0 - net.config.gate_floor) * forward(net.weight_actor, fwd.features, &fwd.weight_actor_cache))
           .array())
          .matrix();
  if (net.config.coverage) {
    fwd.coverage_weights = forward(net.weight_cov, fwd.features, &fwd.weight_cov_cache);
  } else {
    fwd.coverage_weights = Eigen::MatrixXd::Zero(fwd.logits.rows(), fwd.logits.cols());
  }
  fwd.fused = fwd.actor_weights.cwiseProduct(fwd.logits) -
              net.config.kappa * fwd.coverage_weights.cwiseProduct(coverage_norms);
  masked_softmax_columns(fwd.fused, masks, fwd.probs, fwd.log_probs);
  fwd.critic_caches.resize(static_cast<std::size_t>(net.config.objectives));
  fwd.values.resize(net.config.objectives, observations.cols());
  for (int o = 0; o < net.config.objectives; ++o) {
    fwd.values.row(o) = forward(net.critics[static_cast<std::size_t>(o)], fwd.features,
                                &fwd.critic_caches[static_cast<std::size_t>(o)]);
  }
  fwd.value_intrinsic = forward(net.critic_intrinsic, fwd.features, &fwd.intrinsic_cache).row(0);
  return fwd;
}

LossReport policy_loss_and_grads(const PolicyNet& net, const PolicyForward& fwd,
                                 const Eigen::VectorXi& actions, Eigen::Ref<const Eigen::VectorXd> old_log_probs,
                                 Eigen::Ref<const Eigen::VectorXd> advantages,
                                 const Eigen::MatrixXd& value_targets,
                                 Eigen::Ref<const Eigen::VectorXd> intrinsic_targets, const PpoLossConfig& cfg,
                                 PolicyGrads* grads) {
  const Eigen::Index batch = fwd.probs.cols();
  const Eigen::Index action_count = fwd.probs.rows();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const int objectives = net.config.objectives;
  const bool use_coverage = net.config.coverage;

  LossReport report;
  Eigen::MatrixXd d_fused = Eigen::MatrixXd::Zero(action_count, batch);

  for (Eigen::Index b = 0; b < batch; ++b) {
    const int action = actions[b];
    const double new_logp = fwd.log_probs(action, b);
    const double ratio = std::exp(new_logp - old_log_probs[b]);
    const double advantage = advantages[b];
    const double surrogate = ratio * advantage;
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double clipped_surrogate = clipped_ratio * advantage;
    report.policy += -std::min(surrogate, clipped_surrogate) * inv_batch;

    // Gradient flows through the unclipped branch whenever it attains the min.
    const double policy_coef = (surrogate <= clipped_surrogate) ? -inv_batch * ratio * advantage : 0.0;

    double entropy = 0.0;
    double cov = 0.0;
    double overlap_mass = 0.0;  // sum over i of g_i p_i for the coverage term
    for (Eigen::Index i = 0; i < action_count; ++i) {
      const double p = fwd.probs(i, b);
      if (p <= 0.0) continue;
      entropy -= p * fwd.log_probs(i, b);
      const double c = fwd.coverage_norms(i, b);
      cov += std::min(p, c);
      if (p < c) overlap_mass += p;
    }
    report.entropy += entropy * inv_batch;
    report.coverage += cov * inv_batch;

    for (Eigen::Index i = 0; i < action_count; ++i) {
      const double p = fwd.probs(i, b);
      if (p <= 0.0) continue;
      // policy: d logpi(a) / d fused_i = [i == a] - p_i
      double g = policy_coef * ((i == static_cast<Eigen::Index>(action) ? 1.0 : 0.0) - p);
      // entropy bonus enters the total negatively: dH/dfused_i = -p_i (log p_i + H)
      g += cfg.entropy_coef * inv_batch * p * (fwd.log_probs(i, b) + entropy);
      // coverage penalty through the softmax: subgradient 1 where p_i < c_i
      const double cov_indicator = (p < fwd.coverage_norms(i, b)) ? 1.0 : 0.0;
      g += cfg.coverage_coef * inv_batch * p * (cov_indicator - overlap_mass);
      d_fused(i, b) = g;
    }
  }

  // Value losses: per-objective and intrinsic mean squared error.
  Eigen::MatrixXd d_values = Eigen::MatrixXd::Zero(objectives, batch);
  for (int o = 0; o < objectives; ++o) {
    const Eigen::VectorXd err = (fwd.values.row(o) - value_targets.row(o)).transpose();
    report.value += err.squaredNorm() * inv_batch;
    d_values.row(o) = (2.0 * inv_batch * cfg.value_coef) * err.transpose();
  }
  const Eigen::VectorXd intrinsic_err = fwd.value_intrinsic - intrinsic_targets;
  report.value += intrinsic_err.squaredNorm() * inv_batch;
  const Eigen::VectorXd d_value_int = (2.0 * inv_batch * cfg.value_coef) * intrinsic_err;

  report.total = report.policy + cfg.value_coef * report.value + cfg.coverage_coef * report.coverage -
                 cfg.entropy_coef * report.entropy;

  if (grads == nullptr) return report;

  // Backward through the fusion layer and every head into the extractor. The
  // actor weights are an affine map of the weight net's sigmoid output.
  Eigen::MatrixXd d_logits = d_fused.cwiseProduct(fwd.actor_weights);
  Eigen::MatrixXd d_wa = (1.0 - net.config.gate_floor) * d_fused.cwiseProduct(fwd.logits);

  Eigen::MatrixXd d_features;
  grads->actor = backward(net.actor, fwd.actor_cache, d_logits, &d_features);
  Eigen::MatrixXd d_features_accum = d_features;
  grads->weight_actor = backward(net.weight_actor, fwd.weight_actor_cache, d_wa, &d_features);
  d_features_accum += d_features;
  if (use_coverage) {
    // d fused / d wc = -kappa * cnorm
    Eigen::MatrixXd d_wc = d_fused.cwiseProduct(-net.config.kappa * fwd.coverage_norms);
    grads->weight_cov = backward(net.weight_cov, fwd.weight_cov_cache, d_wc, &d_features);
    d_features_accum += d_features;
  } else {
    grads->weight_cov = zero_grads(net.weight_cov);
  }
  grads->critics.resize(static_cast<std::size_t>(objectives));
  for (int o = 0; o < objectives; ++o) {
    grads->critics[static_cast<std::size_t>(o)] =
        backward(net.critics[static_cast<std::size_t>(o)], fwd.critic_caches[static_cast<std::size_t>(o)],
                 d_values.row(o), &d_features);
    d_features_accum += d_features;
  }
  grads->critic_intrinsic =
      backward(net.critic_intrinsic, fwd.intrinsic_cache, d_value_int.transpose(), &d_features);
  d_features_accum += d_features;
  grads->extractor = backward(net.extractor, fwd.extractor_cache, d_features_accum);
  return report;
}

PolicyAdam make_policy_adam(const PolicyNet& net, const AdamConfig& config) {
  PolicyAdam adam;
  adam.extractor = make_adam(net.extractor, config);
  adam.actor = make_adam(net.actor, config);
  adam.weight_actor = make_adam(net.weight_actor, config);
  adam.weight_cov = make_adam(net.weight_cov, config);
  for (const auto& critic : net.critics) adam.critics.push_back(make_adam(critic, config));
  adam.critic_intrinsic = make_adam(net.critic_intrinsic, config);
  return adam;
}

void policy_adam_step(PolicyNet& net, const PolicyGrads& grads, PolicyAdam& adam) {
  adam_step(net.extractor, grads.extractor, adam.extractor);
  adam_step(net.actor, grads.actor, adam.actor);
  adam_step(net.weight_actor, grads.weight_actor, adam.weight_actor);
  if (net.config.coverage) adam_step(net.weight_cov, grads.weight_cov, adam.weight_cov);
  for (std::size_t o = 0; o < net.critics.size(); ++o)
    adam_step(net.critics[o], grads.critics[o], adam.critics[o]);
  adam_step(net.critic_intrinsic, grads.critic_intrinsic, adam.critic_intrinsic);
}

void add_policy_sections(CheckpointWriter& writer, const PolicyNet& net) {
  writer.add_u64("policy/observation_size", static_cast<std::uint64_t>(net.config.observation_size));
  writer.add_u64("policy/action_count", static_cast<std::uint64_t>(net.config.action_count));
  writer.add_u64("policy/objectives", static_cast<std::uint64_t>(net.config.objectives));
  writer.add_scalar("policy/kappa", net.config.kappa);
  writer.add_scalar("policy/gate_floor", net.config.gate_floor);
  writer.add_u64("policy/coverage", net.config.coverage ? 1 : 0);
  writer.add_mlp("policy/extractor", net.extractor);
  writer.add_mlp("policy/actor", net.actor);
  writer.add_mlp("policy/weight_actor", net.weight_actor);
  writer.add_mlp("policy/weight_cov", net.weight_cov);
  for (std::size_t o = 0; o < net.critics.size(); ++o)
    writer.add_mlp("policy/critic" + std::to_string(o), net.critics[o]);
  writer.add_mlp("policy/critic_intrinsic", net.critic_intrinsic);
}

PolicyNet read_policy_sections(const CheckpointReader& reader) {
  PolicyNet net;
  net.config.observation_size = static_cast<int>(reader.u64("policy/observation_size"));
  net.config.action_count = static_cast<int>(reader.u64("policy/action_count"));
  net.config.objectives = static_cast<int>(reader.u64("policy/objectives"));
  net.config.kappa = reader.scalar("policy/kappa");
  net.config.gate_floor = reader.scalar("policy/gate_floor");
  net.config.coverage = reader.u64("policy/coverage") == 1;
  net.extractor = reader.mlp("policy/extractor");
  net.actor = reader.mlp("policy/actor");
  net.weight_actor = reader.mlp("policy/weight_actor");
  net.weight_cov = reader.mlp("policy/weight_cov");
  for (int o = 0; o < net.config.objectives; ++o)
    net.critics.push_back(reader.mlp("policy/critic" + std::to_string(o)));
  net.critic_intrinsic = reader.mlp("policy/critic_intrinsic");
  // Hidden sizes are implicit in the loaded layers.
  net.config.extractor_hidden.clear();
  const auto extractor_sizes = net.extractor.layer_sizes();
  net.config.extractor_hidden.assign(extractor_sizes.begin() + 1, extractor_sizes.end());
  const auto weight_sizes = net.weight_actor.layer_sizes();
  net.config.weight_hidden.assign(weight_sizes.begin() + 1, weight_sizes.end() - 1);
  const auto critic_sizes = net.critics.front().layer_sizes();
  net.config.critic_hidden.assign(critic_sizes.begin() + 1, critic_sizes.end() - 1);
  return net;
}

}  // namespace clap
