#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "clap/actions.hpp"
#include "clap/rng.hpp"
#include "clap/scenario.hpp"
#include "clap/types.hpp"

namespace clap {

struct StepInfo {
  bool action_succeeded = false;
  bool goal_reached = false;
  double action_cost = 0.0;
  int privilege_gains = 0;  // hosts newly elevated to root this step
};

struct StepResult {
  Eigen::VectorXd observation;
  Eigen::VectorXd reward;
  bool done = false;
  StepInfo info;
};

// Vector-reward episodic environment. Instances are single-owner; run several
// instances for parallel rollouts.
class MoEnv {
 public:
  virtual ~MoEnv() = default;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;
  virtual int objective_count() const = 0;
  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  // New episode continuing the current random stream.
  virtual Eigen::VectorXd reset() = 0;
  virtual const MaskArray& availability_mask() const = 0;
  virtual StepResult step(int action_index) = 0;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkEnvOptions {
  int objectives = 2;          // 1 collapses to the scalar compromise reward
  bool zero_action_cost = false;
};

struct HostState {
  bool discovered = false;
  bool reachable = false;
  AccessLevel access = AccessLevel::None;
  bool known_os = false;
  bool known_services = false;
  bool known_processes = false;
};

// The network attack environment: partial observation, precondition-gated
// action availability, stochastic exploits, vector rewards.
class NetworkEnv final : public MoEnv {
 public:
  explicit NetworkEnv(Scenario scenario, NetworkEnvOptions options = {});

  int observation_size() const override;
  int action_count() const override { return static_cast<int>(actions_.size()); }
  int objective_count() const override { return options_.objectives; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  Eigen::VectorXd reset() override;
  const MaskArray& availability_mask() const override { return mask_; }
  StepResult step(int action_index) override;

  const Scenario& scenario() const { return scenario_; }
  const std::vector<Action>& actions() const { return actions_; }
  const HostState& host_state(int host) const { return state_[static_cast<std::size_t>(host)]; }
  int steps_taken() const { return step_; }
  bool goal_reached() const;

  // Line-delimited step records (step, action index, action name, reward
  // vector, done) for replay and debugging. Pass nullptr to disable.
  void set_trajectory_log(std::ostream* log) { trajectory_log_ = log; }

 private:
  void start_episode();
  void refresh_reachability();
  void refresh_mask();
  bool action_available(const Action& a) const;
  Eigen::VectorXd observe() const;
  Eigen::VectorXd make_reward(double compromise, double privesc) const;

  Scenario scenario_;
  NetworkEnvOptions options_;
  std::vector<Action> actions_;
  std::vector<HostState> state_;
  MaskArray mask_;
  Rng rng_;
  int step_ = 0;
  bool last_action_success_ = false;
  int last_action_index_ = -1;
  std::ostream* trajectory_log_ = nullptr;
};

}  // namespace clap
