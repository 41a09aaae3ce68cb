#include "clap/actions.hpp"

namespace clap {

std::string kind_name(ActionKind kind) {
  switch (kind) {
    case ActionKind::ServiceScan: return "service_scan";
    case ActionKind::OsScan: return "os_scan";
    case ActionKind::ProcessScan: return "process_scan";
    case ActionKind::SubnetScan: return "subnet_scan";
    case ActionKind::Exploit: return "exploit";
    case ActionKind::PrivEsc: return "privesc";
  }
  return "?";
}

namespace {

std::string address_of(const Scenario& s, int host) {
  const auto& a = s.hosts[static_cast<std::size_t>(host)].address;
  return std::to_string(a.subnet) + "." + std::to_string(a.local);
}

}  // namespace

std::string Action::name(const Scenario& s) const {
  std::string out = kind_name(kind);
  if (kind == ActionKind::Exploit) out += " " + s.exploits[static_cast<std::size_t>(ref)].name;
  if (kind == ActionKind::PrivEsc) out += " " + s.privescs[static_cast<std::size_t>(ref)].name;
  if (source >= 0) out += " " + address_of(s, source) + " ->";
  if (kind == ActionKind::SubnetScan) {
    out += " subnet " + std::to_string(target_subnet);
  } else {
    out += " " + address_of(s, target_host);
  }
  return out;
}

std::vector<Action> enumerate_actions(const Scenario& s) {
  std::vector<Action> actions;
  actions.reserve(static_cast<std::size_t>(action_space_size(s)));
  const int hosts = s.host_count();
  const int exploits = static_cast<int>(s.exploits.size());
  const int privescs = static_cast<int>(s.privescs.size());

  const auto push = [&actions](Action a) {
    a.global_index = static_cast<int>(actions.size());
    actions.push_back(a);
  };

  if (s.mode == ActionMode::Nasim) {
    for (int h = 0; h < hosts; ++h) {
      const int subnet = s.hosts[static_cast<std::size_t>(h)].address.subnet;
      push({ActionKind::ServiceScan, -1, h, -1, -1, -1});
      push({ActionKind::OsScan, -1, h, -1, -1, -1});
      push({ActionKind::ProcessScan, -1, h, -1, -1, -1});
      push({ActionKind::SubnetScan, -1, -1, subnet, -1, -1});
      for (int e = 0; e < exploits; ++e) push({ActionKind::Exploit, -1, h, -1, e, -1});
      for (int p = 0; p < privescs; ++p) push({ActionKind::PrivEsc, -1, h, -1, p, -1});
    }
    return actions;
  }

  // Cage mode: every action originates from a source host.
  for (int src = 0; src < hosts; ++src) {
    for (int dst = 0; dst < hosts; ++dst) {
      if (dst == src) continue;
      push({ActionKind::ServiceScan, src, dst, -1, -1, -1});
      push({ActionKind::OsScan, src, dst, -1, -1, -1});
      for (int e = 0; e < exploits; ++e) push({ActionKind::Exploit, src, dst, -1, e, -1});
    }
    for (int subnet = 1; subnet <= s.subnet_count(); ++subnet)
      push({ActionKind::SubnetScan, src, -1, subnet, -1, -1});
    push({ActionKind::ProcessScan, src, src, -1, -1, -1});
    for (int p = 0; p < privescs; ++p) push({ActionKind::PrivEsc, src, src, -1, p, -1});
  }
  return actions;
}

}  // namespace clap
