#include "clap/env.hpp"

#include <algorithm>

namespace clap {

NetworkEnv::NetworkEnv(Scenario scenario, NetworkEnvOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      actions_(enumerate_actions(scenario_)),
      rng_(0) {
  if (options_.objectives < 1 || options_.objectives > 2)
    throw ScenarioError("objective count must be 1 or 2");
  const auto violations = validate(scenario_);
  if (!violations.empty())
    throw ScenarioError("invalid scenario:\n" + format_violations(violations));
  start_episode();
}

int NetworkEnv::observation_size() const {
  const int per_host = 6 + scenario_.num_os + scenario_.num_services + scenario_.num_processes;
  return scenario_.host_count() * per_host + 3;
}

Eigen::VectorXd NetworkEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  start_episode();
  return observe();
}

Eigen::VectorXd NetworkEnv::reset() {
  start_episode();
  return observe();
}

void NetworkEnv::start_episode() {
  state_.assign(static_cast<std::size_t>(scenario_.host_count()), HostState{});
  step_ = 0;
  last_action_success_ = false;
  last_action_index_ = -1;
  if (scenario_.mode == ActionMode::Cage) {
    // The attacker starts with a user foothold on the first host of an entry
    // subnet; without one no cage action has a valid source.
    for (int h = 0; h < scenario_.host_count(); ++h) {
      if (scenario_.entry_subnet(scenario_.hosts[static_cast<std::size_t>(h)].address.subnet)) {
        state_[static_cast<std::size_t>(h)].discovered = true;
        state_[static_cast<std::size_t>(h)].access = AccessLevel::User;
        break;
      }
    }
  }
  refresh_reachability();
  refresh_mask();
}

void NetworkEnv::refresh_reachability() {
  const int hosts = scenario_.host_count();
  for (int i = 0; i < hosts; ++i) {
    const int subnet = scenario_.hosts[static_cast<std::size_t>(i)].address.subnet;
    bool reachable = scenario_.entry_subnet(subnet);
    for (int j = 0; j < hosts && !reachable; ++j) {
      if (state_[static_cast<std::size_t>(j)].access != AccessLevel::None &&
          scenario_.same_or_adjacent(scenario_.hosts[static_cast<std::size_t>(j)].address.subnet, subnet))
        reachable = true;
    }
    state_[static_cast<std::size_t>(i)].reachable = reachable;
  }
}

bool NetworkEnv::action_available(const Action& a) const {
  // Cage mode: the source must be compromised and within pivoting range of
  // the target.
  if (a.source >= 0) {
    const auto& src = state_[static_cast<std::size_t>(a.source)];
    if (src.access == AccessLevel::None) return false;
    const int src_subnet = scenario_.hosts[static_cast<std::size_t>(a.source)].address.subnet;
    if (a.kind == ActionKind::SubnetScan) {
      if (!scenario_.same_or_adjacent(src_subnet, a.target_subnet)) return false;
    } else if (a.target_host != a.source) {
      const int dst_subnet = scenario_.hosts[static_cast<std::size_t>(a.target_host)].address.subnet;
      if (!scenario_.same_or_adjacent(src_subnet, dst_subnet)) return false;
    }
  }

  switch (a.kind) {
    case ActionKind::ServiceScan:
    case ActionKind::OsScan:
    case ActionKind::ProcessScan:
      return state_[static_cast<std::size_t>(a.target_host)].discovered;
    case ActionKind::SubnetScan: {
      if (a.source >= 0) return true;  // cage gating handled above
      // Available once the subnet borders a foothold: the internet entry or a
      // compromised host's subnet.
      if (scenario_.entry_subnet(a.target_subnet)) return true;
      for (int j = 0; j < scenario_.host_count(); ++j) {
        if (state_[static_cast<std::size_t>(j)].access != AccessLevel::None &&
            scenario_.same_or_adjacent(scenario_.hosts[static_cast<std::size_t>(j)].address.subnet,
                                       a.target_subnet))
          return true;
      }
      return false;
    }
    case ActionKind::Exploit: {
      const auto& target = state_[static_cast<std::size_t>(a.target_host)];
      if (!target.discovered || !target.reachable || !target.known_services) return false;
      const auto& exploit = scenario_.exploits[static_cast<std::size_t>(a.ref)];
      return scenario_.hosts[static_cast<std::size_t>(a.target_host)]
          .services[static_cast<std::size_t>(exploit.service)];
    }
    case ActionKind::PrivEsc: {
      const auto& target = state_[static_cast<std::size_t>(a.target_host)];
      if (target.access != AccessLevel::User || !target.known_processes) return false;
      const auto& privesc = scenario_.privescs[static_cast<std::size_t>(a.ref)];
      return scenario_.hosts[static_cast<std::size_t>(a.target_host)]
          .processes[static_cast<std::size_t>(privesc.process)];
    }
  }
  return false;
}

void NetworkEnv::refresh_mask() {
  mask_.resize(static_cast<Eigen::Index>(actions_.size()));
  for (std::size_t i = 0; i < actions_.size(); ++i)
    mask_[static_cast<Eigen::Index>(i)] = action_available(actions_[i]);
}

bool NetworkEnv::goal_reached() const {
  for (int h = 0; h < scenario_.host_count(); ++h) {
    if (scenario_.hosts[static_cast<std::size_t>(h)].sensitive &&
        state_[static_cast<std::size_t>(h)].access == AccessLevel::None)
      return false;
  }
  return true;
}

Eigen::VectorXd NetworkEnv::make_reward(double compromise, double privesc) const {
  Eigen::VectorXd r(options_.objectives);
  r[0] = compromise;
  if (options_.objectives > 1) r[1] = privesc;
  return r;
}

StepResult NetworkEnv::step(int action_index) {
  if (action_index < 0 || action_index >= action_count())
    throw PreconditionError("action index out of range");
  if (!mask_[action_index])
    throw PreconditionError("action " + actions_[static_cast<std::size_t>(action_index)].name(scenario_) +
                            " is not available");

  const Action& a = actions_[static_cast<std::size_t>(action_index)];
  double cost = 0.0;
  double compromise_gain = 0.0;
  double privesc_gain = 0.0;
  int privilege_gains = 0;
  bool succeeded = false;

  switch (a.kind) {
    case ActionKind::ServiceScan:
      cost = scenario_.scan_costs.service_scan;
      state_[static_cast<std::size_t>(a.target_host)].known_services = true;
      succeeded = true;
      break;
    case ActionKind::OsScan:
      cost = scenario_.scan_costs.os_scan;
      state_[static_cast<std::size_t>(a.target_host)].known_os = true;
      succeeded = true;
      break;
    case ActionKind::ProcessScan:
      cost = scenario_.scan_costs.process_scan;
      state_[static_cast<std::size_t>(a.target_host)].known_processes = true;
      succeeded = true;
      break;
    case ActionKind::SubnetScan:
      cost = scenario_.scan_costs.subnet_scan;
      for (int h = 0; h < scenario_.host_count(); ++h) {
        if (scenario_.hosts[static_cast<std::size_t>(h)].address.subnet == a.target_subnet)
          state_[static_cast<std::size_t>(h)].discovered = true;
      }
      succeeded = true;
      break;
    case ActionKind::Exploit: {
      const auto& exploit = scenario_.exploits[static_cast<std::size_t>(a.ref)];
      cost = exploit.cost;
      const Host& host = scenario_.hosts[static_cast<std::size_t>(a.target_host)];
      auto& target = state_[static_cast<std::size_t>(a.target_host)];
      const bool os_match = exploit.os == kAnyOs || exploit.os == host.os;
      if (os_match && rng_.bernoulli(exploit.success_prob)) {
        succeeded = true;
        const AccessLevel before = target.access;
        if (static_cast<int>(exploit.access) > static_cast<int>(target.access))
          target.access = exploit.access;
        if (before == AccessLevel::None && target.access != AccessLevel::None)
          compromise_gain += host.value;
        if (before != AccessLevel::Root && target.access == AccessLevel::Root) {
          privesc_gain += host.value;
          privilege_gains += 1;
        }
      }
      break;
    }
    case ActionKind::PrivEsc: {
      const auto& privesc = scenario_.privescs[static_cast<std::size_t>(a.ref)];
      cost = privesc.cost;
      const Host& host = scenario_.hosts[static_cast<std::size_t>(a.target_host)];
      auto& target = state_[static_cast<std::size_t>(a.target_host)];
      succeeded = true;
      if (target.access != AccessLevel::Root) {
        target.access = AccessLevel::Root;
        privesc_gain += host.value;
        privilege_gains += 1;
      }
      break;
    }
  }

  if (options_.zero_action_cost) cost = 0.0;

  refresh_reachability();
  refresh_mask();
  step_ += 1;
  last_action_success_ = succeeded;
  last_action_index_ = action_index;

  StepResult result;
  result.reward = make_reward(compromise_gain - cost, privesc_gain);
  result.info.action_succeeded = succeeded;
  result.info.goal_reached = goal_reached();
  result.info.action_cost = cost;
  result.info.privilege_gains = privilege_gains;
  result.done = result.info.goal_reached || step_ >= scenario_.step_budget;
  result.observation = observe();

  if (trajectory_log_ != nullptr) {
    (*trajectory_log_) << step_ << ',' << action_index << ',' << a.name(scenario_);
    for (Eigen::Index i = 0; i < result.reward.size(); ++i) (*trajectory_log_) << ',' << result.reward[i];
    (*trajectory_log_) << ',' << (result.done ? 1 : 0) << '\n';
  }
  return result;
}

Eigen::VectorXd NetworkEnv::observe() const {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(observation_size());
  const int per_host = 6 + scenario_.num_os + scenario_.num_services + scenario_.num_processes;
  for (int h = 0; h < scenario_.host_count(); ++h) {
    const auto& st = state_[static_cast<std::size_t>(h)];
    if (!st.discovered) continue;  // undiscovered slots stay all-zero
    const Host& host = scenario_.hosts[static_cast<std::size_t>(h)];
    Eigen::Index base = static_cast<Eigen::Index>(h) * per_host;
    obs[base + 0] = 1.0;
    obs[base + 1] = st.reachable ? 1.0 : 0.0;
    obs[base + 2 + static_cast<int>(st.access)] = 1.0;
    obs[base + 5] = std::min(host.value / 100.0, 1.0);
    Eigen::Index cursor = base + 6;
    if (st.known_os) obs[cursor + host.os] = 1.0;
    cursor += scenario_.num_os;
    if (st.known_services) {
      for (int svc = 0; svc < scenario_.num_services; ++svc)
        obs[cursor + svc] = host.services[static_cast<std::size_t>(svc)] ? 1.0 : 0.0;
    }
    cursor += scenario_.num_services;
    if (st.known_processes) {
      for (int proc = 0; proc < scenario_.num_processes; ++proc)
        obs[cursor + proc] = host.processes[static_cast<std::size_t>(proc)] ? 1.0 : 0.0;
    }
  }
  const Eigen::Index global = static_cast<Eigen::Index>(scenario_.host_count()) * per_host;
  obs[global + 0] = static_cast<double>(step_) / static_cast<double>(scenario_.step_budget);
  obs[global + 1] = last_action_success_ ? 1.0 : 0.0;
  obs[global + 2] =
      last_action_index_ < 0 ? 0.0 : static_cast<double>(last_action_index_ + 1) / static_cast<double>(action_count());
  return obs;
}

}  // namespace clap
