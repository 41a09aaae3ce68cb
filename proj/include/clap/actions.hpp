#pragma once

#include <string>
#include <vector>

#include "clap/scenario.hpp"

namespace clap {

enum class ActionKind { ServiceScan, OsScan, ProcessScan, SubnetScan, Exploit, PrivEsc };

std::string kind_name(ActionKind kind);

// One entry of the global action index space. Targets are host indices into
// scenario.hosts except for SubnetScan, which targets a subnet id. `source`
// is set in cage mode only.
struct Action {
  ActionKind kind = ActionKind::ServiceScan;
  int source = -1;
  int target_host = -1;
  int target_subnet = -1;
  int ref = -1;  // exploit / privesc list index
  int global_index = -1;

  std::string name(const Scenario& s) const;
};

// Canonical ordering: nasim mode iterates hosts by address and emits the four
// scans, then exploits, then privescs per host (SubnetScan targets the host's
// own subnet). Cage mode iterates source hosts by address and emits
// host-to-host actions (target address major, kind minor), host-to-subnet
// actions, then on-host actions. Length always equals action_space_size.
std::vector<Action> enumerate_actions(const Scenario& s);

}  // namespace clap
