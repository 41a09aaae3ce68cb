#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace clap {

enum class AccessLevel : int { None = 0, User = 1, Root = 2 };

// How the global action space is assembled; see enumerate_actions.
enum class ActionMode { Nasim, Cage };

constexpr int kAnyOs = -1;

struct HostAddress {
  int subnet = 0;  // 1-based; 0 is the internet entry point
  int local = 0;
  auto operator<=>(const HostAddress&) const = default;
};

struct Host {
  HostAddress address;
  int os = 0;
  std::vector<bool> services;   // length num_services
  std::vector<bool> processes;  // length num_processes
  double value = 0.0;
  bool sensitive = false;

  bool operator==(const Host&) const = default;
};

struct Exploit {
  std::string name;
  int service = 0;
  int os = kAnyOs;  // kAnyOs matches every OS
  double success_prob = 1.0;
  double cost = 1.0;
  AccessLevel access = AccessLevel::User;

  bool operator==(const Exploit&) const = default;
};

struct PrivEsc {
  std::string name;
  int process = 0;
  double cost = 1.0;
  AccessLevel access = AccessLevel::Root;

  bool operator==(const PrivEsc&) const = default;
};

struct ScanCosts {
  double service_scan = 1.0;
  double os_scan = 1.0;
  double process_scan = 1.0;
  double subnet_scan = 1.0;

  bool operator==(const ScanCosts&) const = default;
};

// Immutable description of a target network. Subnet ids are 1..subnet_count();
// node 0 of the topology is the internet entry point.
struct Scenario {
  std::string name;
  ActionMode mode = ActionMode::Nasim;
  int num_os = 1;
  int num_services = 1;
  int num_processes = 1;
  int step_budget = 200;
  std::vector<int> subnet_sizes;               // subnet_sizes[k] is the size of subnet k+1
  std::vector<std::vector<bool>> topology;     // (S+1) x (S+1) symmetric adjacency
  std::vector<Host> hosts;                     // sorted by address
  std::vector<Exploit> exploits;
  std::vector<PrivEsc> privescs;
  ScanCosts scan_costs;

  int subnet_count() const { return static_cast<int>(subnet_sizes.size()); }
  int host_count() const { return static_cast<int>(hosts.size()); }

  bool adjacent(int node_a, int node_b) const {
    return topology[static_cast<std::size_t>(node_a)][static_cast<std::size_t>(node_b)];
  }
  // Same subnet or adjacent subnets; the pivoting neighborhood.
  bool same_or_adjacent(int subnet_a, int subnet_b) const {
    return subnet_a == subnet_b || adjacent(subnet_a, subnet_b);
  }
  bool entry_subnet(int subnet) const { return adjacent(0, subnet); }

  int host_index(HostAddress address) const;  // -1 when absent

  bool operator==(const Scenario&) const = default;
};

struct Violation {
  std::string field;
  std::string rule;
};

std::string format_violations(const std::vector<Violation>& violations);

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty result means every Scenario invariant holds.
std::vector<Violation> validate(const Scenario& s);

// Parses the sectioned key/value scenario document. Syntax errors carry
// line/key context; the result is not validated.
Scenario parse_scenario_document(const std::string& text);

// parse + validate; throws ScenarioError listing violations.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical document form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// The closed-form action-space sizes with every count explicit.
long long nasim_action_space_size(long long hosts, long long exploits, long long privescs,
                                  long long scan_kinds);
long long cage_action_space_size(long long hosts, long long subnets, long long host_to_host_kinds,
                                 long long host_to_subnet_kinds, long long on_host_kinds);

// Closed-form size of the global action space for the scenario's mode.
long long action_space_size(const Scenario& s);

enum class ScenarioTemplate { Small, Medium, Large };

ScenarioTemplate parse_template(const std::string& name);  // throws on unknown template

// Deterministic in (seed, template); the result validates and has at least
// one exploit chain from the entry point to every sensitive host.
Scenario generate_scenario(std::uint64_t seed, ScenarioTemplate tmpl);

// Fixpoint reachability over vulnerabilities: true when every sensitive host
// can be compromised from the entry point.
bool solvable(const Scenario& s);

}  // namespace clap
