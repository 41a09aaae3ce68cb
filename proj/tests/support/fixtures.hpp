#pragma once

// Hand-built scenarios and a synthetic environment shared across test suites.

#include <Eigen/Core>

#include "clap/env.hpp"
#include "clap/scenario.hpp"

namespace fixtures {

// internet - s1(1.0) - s2(2.0 sensitive, value 100). One any-OS exploit
// (prob 1), one privesc. Nasim mode.
inline clap::Scenario chain_two_hosts() {
  clap::Scenario s;
  s.name = "chain2";
  s.mode = clap::ActionMode::Nasim;
  s.num_os = 1;
  s.num_services = 1;
  s.num_processes = 1;
  s.step_budget = 50;
  s.subnet_sizes = {1, 1};
  s.topology = {{false, true, false}, {true, false, true}, {false, true, false}};
  clap::Host h0;
  h0.address = {1, 0};
  h0.services = {true};
  h0.processes = {true};
  clap::Host h1;
  h1.address = {2, 0};
  h1.services = {true};
  h1.processes = {true};
  h1.value = 100.0;
  h1.sensitive = true;
  s.hosts = {h0, h1};
  clap::Exploit e;
  e.name = "e0";
  e.service = 0;
  e.os = clap::kAnyOs;
  e.success_prob = 1.0;
  s.exploits = {e};
  clap::PrivEsc p;
  p.name = "p0";
  p.process = 0;
  s.privescs = {p};
  return s;
}

// Adds a value-10 non-sensitive host 1.1 with a process, for privesc reward
// arithmetic.
inline clap::Scenario chain_with_privesc_target() {
  clap::Scenario s = chain_two_hosts();
  s.name = "chain2p";
  s.subnet_sizes[0] = 2;
  clap::Host extra;
  extra.address = {1, 1};
  extra.services = {true};
  extra.processes = {true};
  extra.value = 10.0;
  s.hosts.insert(s.hosts.begin() + 1, extra);
  return s;
}

// Cage-mode chain: internet - s1 - s2 - s3, one host per subnet plus a decoy
// in s2; the sensitive host sits in s3. E = 1, P = 1.
inline clap::Scenario cage_chain() {
  clap::Scenario s;
  s.name = "cage_chain";
  s.mode = clap::ActionMode::Cage;
  s.num_os = 1;
  s.num_services = 2;
  s.num_processes = 1;
  s.step_budget = 60;
  s.subnet_sizes = {1, 2, 1};
  s.topology = {{false, true, false, false},
                {true, false, true, false},
                {false, true, false, true},
                {false, false, true, false}};
  clap::Host foothold;
  foothold.address = {1, 0};
  foothold.services = {true, false};
  foothold.processes = {true};
  clap::Host mid;
  mid.address = {2, 0};
  mid.services = {true, false};
  mid.processes = {true};
  clap::Host decoy;
  decoy.address = {2, 1};
  decoy.services = {false, true};
  decoy.processes = {false};
  clap::Host goal;
  goal.address = {3, 0};
  goal.services = {true, true};
  goal.processes = {true};
  goal.value = 100.0;
  goal.sensitive = true;
  s.hosts = {foothold, mid, decoy, goal};
  clap::Exploit e;
  e.name = "e0";
  e.service = 0;
  e.os = clap::kAnyOs;
  e.success_prob = 1.0;
  s.exploits = {e};
  clap::PrivEsc p;
  p.name = "p0";
  p.process = 0;
  s.privescs = {p};
  return s;
}

// Deterministic two-step three-policy environment with episode returns
// {(0,10), (4,4), (10,0)}; (4,4) lies strictly inside the convex hull of the
// other two, so linear scalarization can never prefer it. The first step
// selects an arm (no reward) and moves to a distinct pending state; the
// second step collects the arm's reward vector. The intermediate state is
// what lets a scalarized critic value steer the selection.
class BanditEnv : public clap::MoEnv {
 public:
  BanditEnv() { enter_start(); }

  int observation_size() const override { return 4; }  // one-hot over {start, arm states}
  int action_count() const override { return 3; }
  int objective_count() const override { return 2; }

  Eigen::VectorXd reset(std::uint64_t) override {
    enter_start();
    return observe();
  }
  Eigen::VectorXd reset() override {
    enter_start();
    return observe();
  }
  const clap::MaskArray& availability_mask() const override { return mask_; }

  clap::StepResult step(int action_index) override {
    clap::StepResult out;
    if (pending_arm_ < 0) {
      pending_arm_ = action_index;
      mask_ = clap::MaskArray::Constant(3, false);
      mask_[0] = true;  // only the collect action remains
      out.reward = Eigen::Vector2d::Zero();
      out.done = false;
    } else {
      static const double arms[3][2] = {{0.0, 10.0}, {4.0, 4.0}, {10.0, 0.0}};
      out.reward = Eigen::Vector2d(arms[pending_arm_][0], arms[pending_arm_][1]);
      out.done = true;
      out.info.goal_reached = true;
      enter_start();
    }
    out.info.action_succeeded = true;
    out.observation = observe();
    return out;
  }

 private:
  void enter_start() {
    pending_arm_ = -1;
    mask_ = clap::MaskArray::Constant(3, true);
  }

  Eigen::VectorXd observe() const {
    Eigen::VectorXd obs = Eigen::VectorXd::Zero(4);
    obs[static_cast<Eigen::Index>(pending_arm_ + 1)] = 1.0;
    return obs;
  }

  int pending_arm_ = -1;
  clap::MaskArray mask_;
};

}  // namespace fixtures
