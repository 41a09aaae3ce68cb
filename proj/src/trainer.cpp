#include "clap/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "clap/gae.hpp"
#include "clap/log.hpp"

namespace clap {

namespace {

double scalarize_value(Scalarization mode, Eigen::Ref<const Eigen::VectorXd> v,
                       Eigen::Ref<const Eigen::VectorXd> w, Eigen::Ref<const Eigen::VectorXd> z,
                       bool literal_sign) {
  if (mode == Scalarization::Linear) return linear_scalarize(v, w);
  return chebyshev_scalar(v, w, z, literal_sign);
}

PolicyConfig policy_config_from(const TrainConfig& config, int observation_size, int action_count,
                                int objectives) {
  PolicyConfig pc;
  pc.observation_size = observation_size;
  pc.action_count = action_count;
  pc.objectives = objectives;
  pc.extractor_hidden = config.extractor_hidden;
  pc.weight_hidden = config.weight_hidden;
  pc.critic_hidden = config.critic_hidden;
  pc.kappa = config.kappa;
  pc.coverage = config.coverage;
  return pc;
}

RndConfig rnd_config_from(const TrainConfig& config, int observation_size) {
  RndConfig rc;
  rc.observation_size = observation_size;
  rc.hidden = config.rnd_hidden;
  rc.feature_size = config.rnd_features;
  rc.adam.learning_rate = config.learning_rate;
  return rc;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string format_csv_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Eigen::VectorXd effective_weights(const TrainConfig& config, int objectives) {
  if (config.weights.size() == 0)
    return Eigen::VectorXd::Constant(objectives, 1.0 / static_cast<double>(objectives));
  if (config.weights.size() != objectives)
    throw TrainError("weight vector length does not match objective count");
  if ((config.weights.array() < 0.0).any())
    throw TrainError("weights must be non-negative");
  const double sum = config.weights.sum();
  if (std::abs(sum - 1.0) > 1e-9) throw TrainError("weights must sum to 1");
  return config.weights;
}

void validate_config(const TrainConfig& c) {
  if (c.gamma < 0.0 || c.gamma > 1.0) throw TrainError("gamma must lie in [0, 1]");
  if (c.lambda < 0.0 || c.lambda > 1.0) throw TrainError("lambda must lie in [0, 1]");
  if (c.clip <= 0.0) throw TrainError("clip range must be positive");
  if (c.tau <= 0.0) throw TrainError("tau must be positive");
  if (c.horizon < 1) throw TrainError("horizon must be at least 1");
  if (c.minibatch < 1) throw TrainError("minibatch must be at least 1");
  if (c.epochs < 1) throw TrainError("epochs must be at least 1");
  if (c.total_steps < 1) throw TrainError("total_steps must be at least 1");
  if (c.learning_rate <= 0.0) throw TrainError("learning rate must be positive");
}

std::string describe(const TrainConfig& c) {
  std::ostringstream out;
  out << "mode=" << (c.mode == Scalarization::Chebyshev ? "chebyshev" : "linear") << "\n";
  out << "weights=";
  for (Eigen::Index i = 0; i < c.weights.size(); ++i)
    out << (i ? "," : "") << format_csv_value(c.weights[i]);
  out << "\n";
  out << "gamma=" << format_csv_value(c.gamma) << "\n";
  out << "lambda=" << format_csv_value(c.lambda) << "\n";
  out << "clip=" << format_csv_value(c.clip) << "\n";
  out << "epochs=" << c.epochs << "\n";
  out << "minibatch=" << c.minibatch << "\n";
  out << "horizon=" << c.horizon << "\n";
  out << "total_steps=" << c.total_steps << "\n";
  out << "intrinsic_coef=" << format_csv_value(c.intrinsic_coef) << "\n";
  out << "coverage_coef=" << format_csv_value(c.coverage_coef) << "\n";
  out << "entropy_coef=" << format_csv_value(c.entropy_coef) << "\n";
  out << "value_coef=" << format_csv_value(c.value_coef) << "\n";
  out << "tau=" << format_csv_value(c.tau) << "\n";
  out << "kappa=" << format_csv_value(c.kappa) << "\n";
  out << "learning_rate=" << format_csv_value(c.learning_rate) << "\n";
  out << "coverage=" << (c.coverage ? 1 : 0) << "\n";
  out << "cheby_literal_sign=" << (c.cheby_literal_sign ? 1 : 0) << "\n";
  out << "seed=" << c.seed << "\n";
  out << "warmup_steps=" << c.warmup_steps << "\n";
  out << "checkpoint_every=" << c.checkpoint_every << "\n";
  out << "extractor_hidden=" << join_ints(c.extractor_hidden) << "\n";
  out << "weight_hidden=" << join_ints(c.weight_hidden) << "\n";
  out << "critic_hidden=" << join_ints(c.critic_hidden) << "\n";
  out << "rnd_hidden=" << join_ints(c.rnd_hidden) << "\n";
  out << "rnd_features=" << c.rnd_features << "\n";
  return out.str();
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows,
                       const std::string& config_banner) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw TrainError("cannot open metrics file for writing: " + path.string());
  std::istringstream banner(config_banner);
  std::string line;
  while (std::getline(banner, line)) {
    if (!line.empty()) f << "# " << line << "\n";
  }
  f << "step,episode_return_obj1,episode_return_obj2,episode_len,success_rate,repeat_fraction,"
       "intrinsic_mean,policy_loss,value_loss,coverage_loss,z1,z2\n";
  for (const auto& r : rows) {
    f << r.step << ',' << format_csv_value(r.episode_return_obj1) << ','
      << format_csv_value(r.episode_return_obj2) << ',' << format_csv_value(r.episode_len) << ','
      << format_csv_value(r.success_rate) << ',' << format_csv_value(r.repeat_fraction) << ','
      << format_csv_value(r.intrinsic_mean) << ',' << format_csv_value(r.policy_loss) << ','
      << format_csv_value(r.value_loss) << ',' << format_csv_value(r.coverage_loss) << ','
      << format_csv_value(r.z1) << ',' << format_csv_value(r.z2) << "\n";
  }
  if (!f) throw TrainError("metrics write failed: " + path.string());
}

UpdateTargets compute_targets(const RolloutBuffer& buffer, Eigen::Ref<const Eigen::VectorXd> bootstrap_values,
                              double bootstrap_intrinsic, const UtopianTracker& utopia,
                              const TrainConfig& config, Eigen::Ref<const Eigen::VectorXd> weights) {
  const int steps = buffer.size();
  const int objectives = static_cast<int>(buffer.rewards.rows());
  const Eigen::VectorXd z = utopia.utopia();

  Eigen::VectorXd scalar_values(steps + 1);
  for (int t = 0; t < steps; ++t)
    scalar_values[t] =
        scalarize_value(config.mode, buffer.values.col(t), weights, z, config.cheby_literal_sign);
  scalar_values[steps] =
      scalarize_value(config.mode, bootstrap_values, weights, z, config.cheby_literal_sign);

  Eigen::VectorXd deltas(steps);
  Eigen::VectorXd intrinsic_deltas(steps);
  for (int t = 0; t < steps; ++t) {
    const bool terminal = buffer.dones[t];
    const double cont = terminal ? 0.0 : 1.0;
    deltas[t] = weights.dot(buffer.rewards.col(t)) + config.gamma * cont * scalar_values[t + 1] -
                scalar_values[t];
    const double next_value_int = (t + 1 < steps) ? buffer.value_intrinsic[t + 1] : bootstrap_intrinsic;
    intrinsic_deltas[t] =
        buffer.intrinsic[t] + config.gamma * cont * next_value_int - buffer.value_intrinsic[t];
  }

  const ArrayXb terminal = buffer.dones.head(steps);
  const Eigen::VectorXd adv_ext = gae(deltas, config.gamma, config.lambda, terminal);
  const Eigen::VectorXd adv_int = gae(intrinsic_deltas, config.gamma, config.lambda, terminal);

  UpdateTargets targets;
  Eigen::VectorXd combined = adv_ext + config.intrinsic_coef * adv_int;
  const double mean = combined.mean();
  const double stddev = std::sqrt((combined.array() - mean).square().sum() /
                                  static_cast<double>(std::max(1, steps)));
  targets.advantages = (combined.array() - mean) / (stddev + 1e-8);

  targets.value_targets.resize(objectives, steps);
  for (int o = 0; o < objectives; ++o) {
    targets.value_targets.row(o) = discounted_returns(buffer.rewards.row(o).head(steps), config.gamma,
                                                      terminal, bootstrap_values[o]);
  }
  targets.intrinsic_targets =
      discounted_returns(buffer.intrinsic.head(steps), config.gamma, terminal, bootstrap_intrinsic);
  return targets;
}

LossReport ppo_update(PolicyNet& policy, RndPair& rnd, PolicyAdam& adam, const RolloutBuffer& buffer,
                      const UpdateTargets& targets, const TrainConfig& config, Rng& shuffle_rng) {
  const int steps = buffer.size();
  const int objectives = static_cast<int>(buffer.rewards.rows());
  std::vector<int> indices(static_cast<std::size_t>(steps));
  std::iota(indices.begin(), indices.end(), 0);

  PpoLossConfig loss_cfg;
  loss_cfg.clip = config.clip;
  loss_cfg.value_coef = config.value_coef;
  loss_cfg.coverage_coef = config.coverage ? config.coverage_coef : 0.0;
  loss_cfg.entropy_coef = config.entropy_coef;

  LossReport mean_report;
  int minibatches = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(indices);
    for (int start = 0; start < steps; start += config.minibatch) {
      const int count = std::min(config.minibatch, steps - start);
      Eigen::MatrixXd obs(buffer.observations.rows(), count);
      Eigen::MatrixXd cnorm(buffer.coverage_norms.rows(), count);
      BoolMatrix masks(buffer.masks.rows(), count);
      Eigen::VectorXi actions(count);
      Eigen::VectorXd old_logp(count), adv(count), int_targets(count);
      Eigen::MatrixXd value_targets(objectives, count);
      for (int k = 0; k < count; ++k) {
        const int idx = indices[static_cast<std::size_t>(start + k)];
        obs.col(k) = buffer.observations.col(idx);
        cnorm.col(k) = buffer.coverage_norms.col(idx);
        masks.col(k) = buffer.masks.col(idx);
        actions[k] = buffer.actions[idx];
        old_logp[k] = buffer.log_probs[idx];
        adv[k] = targets.advantages[idx];
        int_targets[k] = targets.intrinsic_targets[idx];
        value_targets.col(k) = targets.value_targets.col(idx);
      }

      const PolicyForward fwd = policy_forward(policy, obs, cnorm, masks);
      PolicyGrads grads;
      const LossReport report =
          policy_loss_and_grads(policy, fwd, actions, old_logp, adv, value_targets, int_targets, loss_cfg, &grads);
      if (!std::isfinite(report.total)) {
        throw TrainError("ppo_update: non-finite loss (policy=" + std::to_string(report.policy) +
                         ", value=" + std::to_string(report.value) +
                         ", coverage=" + std::to_string(report.coverage) +
                         ", entropy=" + std::to_string(report.entropy) + ")");
      }
      policy_adam_step(policy, grads, adam);
      update_predictor(rnd, obs);

      mean_report.policy += report.policy;
      mean_report.value += report.value;
      mean_report.coverage += report.coverage;
      mean_report.entropy += report.entropy;
      mean_report.total += report.total;
      minibatches += 1;
    }
  }

  const double inv = 1.0 / static_cast<double>(std::max(1, minibatches));
  mean_report.policy *= inv;
  mean_report.value *= inv;
  mean_report.coverage *= inv;
  mean_report.entropy *= inv;
  mean_report.total *= inv;
  return mean_report;
}

TrainResult train(MoEnv& env, const TrainConfig& raw_config, const std::filesystem::path& out_dir) {
  const int objectives = env.objective_count();
  const int action_count = env.action_count();
  const int observation_size = env.observation_size();

  TrainConfig config = raw_config;
  validate_config(config);
  config.weights = effective_weights(raw_config, objectives);
  if (config.warmup_steps < 0) config.warmup_steps = config.horizon;

  TrainResult result;
  result.policy = make_policy(policy_config_from(config, observation_size, action_count, objectives),
                              derive_seed(config.seed, 1));
  result.rnd = make_rnd(rnd_config_from(config, observation_size), derive_seed(config.seed, 2));
  result.utopia = UtopianTracker(objectives, config.tau);
  PolicyAdam adam = make_policy_adam(result.policy, AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});

  Rng warmup_rng(derive_seed(config.seed, 104));
  Rng action_rng(derive_seed(config.seed, 102));
  Rng shuffle_rng(derive_seed(config.seed, 103));

  // Warm-up: full episodes under a uniform masked policy. Initializes the
  // observation statistics, the novelty scale and the utopian point.
  {
    std::vector<Eigen::VectorXd> warmup_observations;
    Eigen::VectorXd obs = env.reset(derive_seed(config.seed, 100));
    observe_observation(result.rnd, obs);
    warmup_observations.push_back(obs);
    Eigen::VectorXd episode_return = Eigen::VectorXd::Zero(objectives);
    int steps = 0;
    while (steps < std::max(1, config.warmup_steps) || !result.utopia.initialized()) {
      const MaskArray& mask = env.availability_mask();
      std::vector<int> available;
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        if (mask[i]) available.push_back(static_cast<int>(i));
      }
      const int action = available[static_cast<std::size_t>(
          warmup_rng.uniform_int(static_cast<int>(available.size())))];
      StepResult sr = env.step(action);
      episode_return += sr.reward;
      steps += 1;
      observe_observation(result.rnd, sr.observation);
      warmup_observations.push_back(sr.observation);
      if (sr.done) {
        result.utopia.update(episode_return);
        episode_return.setZero();
        obs = env.reset();
        observe_observation(result.rnd, obs);
      } else {
        obs = sr.observation;
      }
      if (steps >= std::max(1, config.warmup_steps) * 50 + 100000) break;  // stuck-environment guard
    }
    for (const auto& o : warmup_observations) observe_novelty(result.rnd, raw_novelty(result.rnd, o));
  }

  const std::string banner = describe(config);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  RolloutBuffer buffer(observation_size, action_count, objectives, config.horizon);
  CoverageVector coverage(action_count);

  Eigen::VectorXd obs = env.reset(derive_seed(config.seed, 101));
  observe_observation(result.rnd, obs);
  Eigen::VectorXd episode_return = Eigen::VectorXd::Zero(objectives);
  int episode_len = 0;

  // Carried across rollouts so metrics rows always have values.
  Eigen::VectorXd last_return = Eigen::VectorXd::Zero(objectives);
  double last_len = 0.0, last_success = 0.0;

  const long long updates = std::max(1LL, config.total_steps / config.horizon);
  long long global_step = 0;
  long long next_checkpoint = config.checkpoint_every;

  for (long long update = 0; update < updates; ++update) {
    buffer.clear();
    int repeats = 0;
    double intrinsic_sum = 0.0;
    std::vector<Eigen::VectorXd> finished_returns;
    std::vector<int> finished_lens;
    std::vector<bool> finished_success;

    for (int t = 0; t < config.horizon; ++t) {
      const MaskArray mask = env.availability_mask();
      const PolicyEval eval = evaluate(result.policy, obs, coverage, mask);
      const auto [action, log_prob] = sample_action(eval.probs, action_rng);
      if (coverage.counts()[action] > 0) repeats += 1;

      const Eigen::VectorXd coverage_norm = coverage.normalized();
      coverage.add(action);
      StepResult sr = env.step(action);

      const double raw = raw_novelty(result.rnd, sr.observation);
      const double intrinsic = raw / std::max(result.rnd.reward_stats.stddev()[0], 1e-8);
      observe_novelty(result.rnd, raw);
      observe_observation(result.rnd, sr.observation);
      intrinsic_sum += intrinsic;

      buffer.push(obs, coverage_norm, mask, action, log_prob, sr.reward, intrinsic, eval.values,
                  eval.value_intrinsic, sr.done);

      episode_return += sr.reward;
      episode_len += 1;
      global_step += 1;

      if (sr.done) {
        result.utopia.update(episode_return);
        finished_returns.push_back(episode_return);
        finished_lens.push_back(episode_len);
        finished_success.push_back(sr.info.goal_reached);
        episode_return.setZero();
        episode_len = 0;
        coverage.reset();
        obs = env.reset();
        observe_observation(result.rnd, obs);
      } else {
        obs = sr.observation;
      }
    }

    // Bootstrap values for the truncated tail.
    Eigen::VectorXd bootstrap_values = Eigen::VectorXd::Zero(objectives);
    double bootstrap_intrinsic = 0.0;
    if (!buffer.dones[buffer.size() - 1]) {
      const PolicyEval eval = evaluate(result.policy, obs, coverage, env.availability_mask());
      bootstrap_values = eval.values;
      bootstrap_intrinsic = eval.value_intrinsic;
    }

    const UpdateTargets targets =
        compute_targets(buffer, bootstrap_values, bootstrap_intrinsic, result.utopia, config, config.weights);
    const LossReport losses = ppo_update(result.policy, result.rnd, adam, buffer, targets, config, shuffle_rng);

    if (!finished_returns.empty()) {
      Eigen::VectorXd mean_return = Eigen::VectorXd::Zero(objectives);
      double mean_len = 0.0, success = 0.0;
      for (std::size_t e = 0; e < finished_returns.size(); ++e) {
        mean_return += finished_returns[e];
        mean_len += finished_lens[e];
        success += finished_success[e] ? 1.0 : 0.0;
      }
      const double inv = 1.0 / static_cast<double>(finished_returns.size());
      last_return = mean_return * inv;
      last_len = mean_len * inv;
      last_success = success * inv;
    }

    MetricsRow row;
    row.step = global_step;
    row.episode_return_obj1 = last_return[0];
    row.episode_return_obj2 = objectives > 1 ? last_return[1] : 0.0;
    row.episode_len = last_len;
    row.success_rate = last_success;
    row.repeat_fraction = static_cast<double>(repeats) / static_cast<double>(config.horizon);
    row.intrinsic_mean = intrinsic_sum / static_cast<double>(config.horizon);
    row.policy_loss = losses.policy;
    row.value_loss = losses.value;
    row.coverage_loss = losses.coverage;
    const Eigen::VectorXd z = result.utopia.utopia();
    row.z1 = z[0];
    row.z2 = objectives > 1 ? z[1] : 0.0;
    result.metrics.push_back(row);

    log_debug("update " + std::to_string(update + 1) + "/" + std::to_string(updates) +
              " step=" + std::to_string(global_step) + " return1=" + std::to_string(row.episode_return_obj1) +
              " success=" + std::to_string(row.success_rate));

    if (!out_dir.empty() && config.checkpoint_every > 0 && global_step >= next_checkpoint) {
      save_checkpoint(out_dir / ("checkpoint_" + std::to_string(global_step) + ".bin"), result.policy,
                      result.rnd, result.utopia);
      next_checkpoint += config.checkpoint_every;
    }
  }

  if (!out_dir.empty()) {
    write_metrics_csv(out_dir / "metrics.csv", result.metrics, banner);
    result.checkpoint_path = out_dir / "checkpoint.bin";
    save_checkpoint(result.checkpoint_path, result.policy, result.rnd, result.utopia);
  }
  return result;
}

namespace {

EvalReport run_eval(MoEnv& env, int episodes, std::uint64_t seed, const PolicyNet* policy) {
  const int objectives = env.objective_count();
  EvalReport report;
  report.mean_return = Eigen::VectorXd::Zero(objectives);
  report.episodes = episodes;
  CoverageVector coverage(env.action_count());
  Rng rng(derive_seed(seed, 7));

  for (int e = 0; e < episodes; ++e) {
    Eigen::VectorXd obs = env.reset(derive_seed(seed, static_cast<std::uint64_t>(e)));
    coverage.reset();
    Eigen::VectorXd episode_return = Eigen::VectorXd::Zero(objectives);
    int steps = 0;
    int privilege_gains = 0;
    bool success = false;
    bool done = false;
    while (!done) {
      const MaskArray& mask = env.availability_mask();
      int action;
      if (policy != nullptr) {
        const PolicyEval eval = evaluate(*policy, obs, coverage, mask);
        action = greedy_action(eval.fused, mask);
      } else {
        std::vector<int> available;
        for (Eigen::Index i = 0; i < mask.size(); ++i) {
          if (mask[i]) available.push_back(static_cast<int>(i));
        }
        action = available[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(available.size())))];
      }
      coverage.add(action);
      StepResult sr = env.step(action);
      episode_return += sr.reward;
      privilege_gains += sr.info.privilege_gains;
      steps += 1;
      done = sr.done;
      success = sr.info.goal_reached;
      obs = sr.observation;
    }
    report.mean_return += episode_return;
    report.mean_actions_to_goal += steps;
    report.mean_privilege_gains += privilege_gains;
    report.success_rate += success ? 1.0 : 0.0;
  }
  const double inv = 1.0 / static_cast<double>(episodes);
  report.mean_return *= inv;
  report.mean_actions_to_goal *= inv;
  report.mean_privilege_gains *= inv;
  report.success_rate *= inv;
  return report;
}

}  // namespace

EvalReport evaluate_policy(const PolicyNet& policy, MoEnv& env, int episodes, std::uint64_t seed) {
  if (policy.config.observation_size != env.observation_size() ||
      policy.config.action_count != env.action_count())
    throw TrainError("checkpoint/scenario shape mismatch: policy expects obs=" +
                     std::to_string(policy.config.observation_size) + " actions=" +
                     std::to_string(policy.config.action_count) + ", environment has obs=" +
                     std::to_string(env.observation_size()) + " actions=" +
                     std::to_string(env.action_count()));
  return run_eval(env, episodes, seed, &policy);
}

EvalReport evaluate_random(MoEnv& env, int episodes, std::uint64_t seed) {
  return run_eval(env, episodes, seed, nullptr);
}

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& policy, const RndPair& rnd,
                     const UtopianTracker& utopia) {
  CheckpointWriter writer;
  add_policy_sections(writer, policy);
  add_rnd_sections(writer, rnd);
  writer.add_vector("utopia/best", utopia.best());
  writer.add_scalar("utopia/offset", utopia.offset());
  writer.add_u64("utopia/initialized", utopia.initialized() ? 1 : 0);
  writer.write(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  CheckpointReader reader(path);
  Checkpoint ckpt;
  ckpt.policy = read_policy_sections(reader);
  ckpt.rnd = read_rnd_sections(reader);
  const Eigen::VectorXd best = reader.vector("utopia/best");
  ckpt.utopia = UtopianTracker(static_cast<int>(best.size()), reader.scalar("utopia/offset"));
  if (reader.u64("utopia/initialized") == 1) ckpt.utopia.update(best);
  return ckpt;
}

}  // namespace clap
