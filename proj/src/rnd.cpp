#include "clap/rnd.hpp"

#include <cmath>

namespace clap {

Eigen::VectorXd RunningStats::pack() const {
  Eigen::VectorXd out(1 + 2 * mean_.size());
  out[0] = static_cast<double>(count_);
  out.segment(1, mean_.size()) = mean_;
  out.segment(1 + mean_.size(), m2_.size()) = m2_;
  return out;
}

RunningStats RunningStats::unpack(Eigen::Ref<const Eigen::VectorXd> packed) {
  const Eigen::Index dim = (packed.size() - 1) / 2;
  RunningStats s(static_cast<int>(dim));
  s.count_ = static_cast<long long>(packed[0]);
  s.mean_ = packed.segment(1, dim);
  s.m2_ = packed.segment(1 + dim, dim);
  return s;
}

RndPair make_rnd(const RndConfig& config, std::uint64_t seed) {
  RndPair rnd;
  rnd.config = config;
  std::vector<int> sizes{config.observation_size};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(config.feature_size);
  std::vector<Activation> acts(config.hidden.size(), Activation::Relu);
  acts.push_back(Activation::Identity);
  rnd.target = make_mlp<double>(sizes, acts, derive_seed(seed, 40));
  rnd.predictor = make_mlp<double>(sizes, acts, derive_seed(seed, 41));
  rnd.predictor_adam = make_adam(rnd.predictor, config.adam);
  rnd.observation_stats = RunningStats(config.observation_size);
  rnd.reward_stats = RunningStats(1);
  return rnd;
}

Eigen::VectorXd normalize_observation(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation) {
  const Eigen::VectorXd sigma = rnd.observation_stats.stddev().cwiseMax(1e-8);
  return ((observation - rnd.observation_stats.mean()).cwiseQuotient(sigma))
      .cwiseMax(-5.0)
      .cwiseMin(5.0);
}

double raw_novelty(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation) {
  const Eigen::VectorXd normalized = normalize_observation(rnd, observation);
  const Eigen::VectorXd target_features = forward(rnd.target, normalized);
  const Eigen::VectorXd predicted = forward(rnd.predictor, normalized);
  return (predicted - target_features).squaredNorm();
}

double intrinsic_reward(const RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation) {
  const double scale = std::max(rnd.reward_stats.stddev()[0], 1e-8);
  return raw_novelty(rnd, observation) / scale;
}

void observe_observation(RndPair& rnd, Eigen::Ref<const Eigen::VectorXd> observation) {
  rnd.observation_stats.observe(observation);
}

void observe_novelty(RndPair& rnd, double raw) {
  Eigen::VectorXd v(1);
  v[0] = raw;
  rnd.reward_stats.observe(v);
}

double update_predictor(RndPair& rnd, const Eigen::MatrixXd& observations) {
  if (observations.cols() == 0) throw NnError("update_predictor: empty batch");
  Eigen::MatrixXd normalized(observations.rows(), observations.cols());
  for (Eigen::Index b = 0; b < observations.cols(); ++b)
    normalized.col(b) = normalize_observation(rnd, observations.col(b));

  const Eigen::MatrixXd target_features = forward(rnd.target, normalized);
  ForwardCacheD cache;
  const Eigen::MatrixXd predicted = forward(rnd.predictor, normalized, &cache);
  const Eigen::MatrixXd err = predicted - target_features;
  const double inv_batch = 1.0 / static_cast<double>(observations.cols());
  const double loss = err.squaredNorm() * inv_batch;
  if (!std::isfinite(loss)) throw NnError("update_predictor: non-finite loss");

  const Eigen::MatrixXd d_out = 2.0 * inv_batch * err;
  const MlpGradsD grads = backward(rnd.predictor, cache, d_out);
  adam_step(rnd.predictor, grads, rnd.predictor_adam);
  return loss;
}

void add_rnd_sections(CheckpointWriter& writer, const RndPair& rnd) {
  writer.add_u64("rnd/observation_size", static_cast<std::uint64_t>(rnd.config.observation_size));
  writer.add_u64("rnd/feature_size", static_cast<std::uint64_t>(rnd.config.feature_size));
  writer.add_mlp("rnd/target", rnd.target);
  writer.add_mlp("rnd/predictor", rnd.predictor);
  writer.add_vector("rnd/observation_stats", rnd.observation_stats.pack());
  writer.add_vector("rnd/reward_stats", rnd.reward_stats.pack());
}

RndPair read_rnd_sections(const CheckpointReader& reader) {
  RndPair rnd;
  rnd.config.observation_size = static_cast<int>(reader.u64("rnd/observation_size"));
  rnd.config.feature_size = static_cast<int>(reader.u64("rnd/feature_size"));
  rnd.target = reader.mlp("rnd/target");
  rnd.predictor = reader.mlp("rnd/predictor");
  const auto sizes = rnd.predictor.layer_sizes();
  rnd.config.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
  rnd.predictor_adam = make_adam(rnd.predictor, rnd.config.adam);
  rnd.observation_stats = RunningStats::unpack(reader.vector("rnd/observation_stats"));
  rnd.reward_stats = RunningStats::unpack(reader.vector("rnd/reward_stats"));
  return rnd;
}

}  // namespace clap
