#include "clap/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "clap/rng.hpp"

namespace clap {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
          c == '_' || c == '.' || c == '-'))
      return false;
  }
  return true;
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ScenarioError("line " + std::to_string(line) + ": " + msg);
}

long long to_int(const std::string& v, int line, const std::string& key) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "key '" + key + "': expected integer, got '" + v + "'");
  return out;
}

double to_real(const std::string& v, int line, const std::string& key) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(line, "key '" + key + "': expected number, got '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  std::stringstream ss(v);
  while (std::getline(ss, cur, ',')) parts.push_back(trim(cur));
  if (!v.empty() && v.back() == ',') parts.push_back("");
  return parts;
}

std::vector<bool> to_bool_list(const std::string& v, int line, const std::string& key) {
  std::vector<bool> out;
  for (const auto& p : split_list(v)) {
    const long long b = to_int(p, line, key);
    if (b != 0 && b != 1) fail(line, "key '" + key + "': list entries must be 0 or 1");
    out.push_back(b == 1);
  }
  return out;
}

AccessLevel to_access(const std::string& v, int line, const std::string& key) {
  if (v == "user") return AccessLevel::User;
  if (v == "root") return AccessLevel::Root;
  fail(line, "key '" + key + "': expected 'user' or 'root', got '" + v + "'");
}

// One parsed section: kind, argument, and key -> (value, line).
struct Section {
  std::string kind;
  std::string arg;
  int line = 0;
  std::map<std::string, std::pair<std::string, int>> entries;
  std::vector<std::string> key_order;
};

class SectionView {
 public:
  SectionView(const Section& s, std::set<std::string> allowed) : s_(s), allowed_(std::move(allowed)) {
    for (const auto& [key, value] : s_.entries) {
      if (allowed_.count(key) == 0)
        fail(value.second, "unknown key '" + key + "' in section [" + s_.kind +
                               (s_.arg.empty() ? "" : " " + s_.arg) + "]");
    }
  }

  bool has(const std::string& key) const { return s_.entries.count(key) > 0; }

  std::pair<std::string, int> require(const std::string& key) const {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end())
      fail(s_.line, "section [" + s_.kind + (s_.arg.empty() ? "" : " " + s_.arg) +
                        "] is missing required key '" + key + "'");
    return it->second;
  }

  long long get_int(const std::string& key) const {
    const auto [v, line] = require(key);
    return to_int(v, line, key);
  }
  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }
  double get_real(const std::string& key) const {
    const auto [v, line] = require(key);
    return to_real(v, line, key);
  }
  double get_real(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? require(key).first : fallback;
  }

 private:
  const Section& s_;
  std::set<std::string> allowed_;
};

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      Section s;
      s.line = line_no;
      const auto space = inner.find(' ');
      if (space == std::string::npos) {
        s.kind = inner;
      } else {
        s.kind = inner.substr(0, space);
        s.arg = trim(inner.substr(space + 1));
      }
      if (s.kind.empty()) fail(line_no, "empty section header");
      sections.push_back(std::move(s));
      current = &sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
    if (current == nullptr) fail(line_no, "key/value pair outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!is_identifier(key)) fail(line_no, "invalid key '" + key + "'");
    if (current->entries.count(key) > 0)
      fail(line_no, "duplicate key '" + key + "' in section [" + current->kind + "]");
    current->entries.emplace(key, std::make_pair(value, line_no));
    current->key_order.push_back(key);
  }
  return sections;
}

HostAddress parse_address(const std::string& arg, int line) {
  const auto dot = arg.find('.');
  if (dot == std::string::npos) fail(line, "host address must be '<subnet>.<id>', got '" + arg + "'");
  HostAddress a;
  a.subnet = static_cast<int>(to_int(arg.substr(0, dot), line, "host subnet"));
  a.local = static_cast<int>(to_int(arg.substr(dot + 1), line, "host id"));
  return a;
}

}  // namespace

int Scenario::host_index(HostAddress address) const {
  for (int i = 0; i < host_count(); ++i) {
    if (hosts[static_cast<std::size_t>(i)].address == address) return i;
  }
  return -1;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "\n";
    out += v.field + ": " + v.rule;
  }
  return out;
}

Scenario parse_scenario_document(const std::string& text) {
  Scenario s;
  bool seen_meta = false, seen_subnets = false, seen_topology = false;
  std::vector<std::pair<std::vector<bool>, int>> topo_rows;  // row -> (values, declared index)
  int topo_line = 0;

  const auto sections = split_sections(text);
  for (const auto& section : sections) {
    if (section.kind == "meta") {
      if (seen_meta) fail(section.line, "duplicate [meta] section");
      seen_meta = true;
      SectionView view(section, {"name", "mode", "num_os", "num_services", "num_processes", "step_budget"});
      s.name = view.get_string("name", "");
      const std::string mode = view.get_string("mode", "nasim");
      if (mode == "nasim") {
        s.mode = ActionMode::Nasim;
      } else if (mode == "cage") {
        s.mode = ActionMode::Cage;
      } else {
        fail(view.require("mode").second, "mode must be 'nasim' or 'cage', got '" + mode + "'");
      }
      s.num_os = static_cast<int>(view.get_int("num_os"));
      s.num_services = static_cast<int>(view.get_int("num_services"));
      s.num_processes = static_cast<int>(view.get_int("num_processes"));
      s.step_budget = static_cast<int>(view.get_int("step_budget", 200));
    } else if (section.kind == "subnets") {
      if (seen_subnets) fail(section.line, "duplicate [subnets] section");
      seen_subnets = true;
      SectionView view(section, {"sizes"});
      const auto [value, line] = view.require("sizes");
      for (const auto& part : split_list(value))
        s.subnet_sizes.push_back(static_cast<int>(to_int(part, line, "sizes")));
    } else if (section.kind == "topology") {
      if (seen_topology) fail(section.line, "duplicate [topology] section");
      seen_topology = true;
      topo_line = section.line;
      for (const auto& key : section.key_order) {
        if (key.rfind("row", 0) != 0) fail(section.entries.at(key).second, "unknown key '" + key + "' in [topology]");
        const auto [value, line] = section.entries.at(key);
        const int idx = static_cast<int>(to_int(key.substr(3), line, key));
        topo_rows.emplace_back(to_bool_list(value, line, key), idx);
        if (topo_rows.back().first.empty()) fail(line, "empty topology row");
      }
    } else if (section.kind == "host") {
      SectionView view(section, {"os", "services", "processes", "value", "sensitive"});
      Host h;
      h.address = parse_address(section.arg, section.line);
      h.os = static_cast<int>(view.get_int("os"));
      {
        const auto [v, line] = view.require("services");
        h.services = to_bool_list(v, line, "services");
      }
      {
        const auto [v, line] = view.require("processes");
        h.processes = to_bool_list(v, line, "processes");
      }
      h.value = view.get_real("value", 0.0);
      const long long sens = view.get_int("sensitive", 0);
      if (sens != 0 && sens != 1) fail(section.line, "key 'sensitive': expected 0 or 1");
      h.sensitive = sens == 1;
      s.hosts.push_back(std::move(h));
    } else if (section.kind == "exploit") {
      if (section.arg.empty()) fail(section.line, "[exploit] needs a name: [exploit <name>]");
      SectionView view(section, {"service", "os", "prob", "cost", "access"});
      Exploit e;
      e.name = section.arg;
      e.service = static_cast<int>(view.get_int("service"));
      if (view.has("os")) {
        const auto [v, line] = view.require("os");
        e.os = (v == "any") ? kAnyOs : static_cast<int>(to_int(v, line, "os"));
      }
      e.success_prob = view.get_real("prob", 1.0);
      e.cost = view.get_real("cost", 1.0);
      if (view.has("access")) {
        const auto [v, line] = view.require("access");
        e.access = to_access(v, line, "access");
      }
      s.exploits.push_back(std::move(e));
    } else if (section.kind == "privesc") {
      if (section.arg.empty()) fail(section.line, "[privesc] needs a name: [privesc <name>]");
      SectionView view(section, {"process", "cost", "access"});
      PrivEsc p;
      p.name = section.arg;
      p.process = static_cast<int>(view.get_int("process"));
      p.cost = view.get_real("cost", 1.0);
      if (view.has("access")) {
        const auto [v, line] = view.require("access");
        p.access = to_access(v, line, "access");
        if (p.access != AccessLevel::Root) fail(line, "privesc access must be 'root'");
      }
      s.privescs.push_back(std::move(p));
    } else if (section.kind == "costs") {
      SectionView view(section, {"service_scan", "os_scan", "process_scan", "subnet_scan"});
      s.scan_costs.service_scan = view.get_real("service_scan", 1.0);
      s.scan_costs.os_scan = view.get_real("os_scan", 1.0);
      s.scan_costs.process_scan = view.get_real("process_scan", 1.0);
      s.scan_costs.subnet_scan = view.get_real("subnet_scan", 1.0);
    } else {
      fail(section.line, "unknown section kind '" + section.kind + "'");
    }
  }

  if (!seen_meta) throw ScenarioError("missing [meta] section");
  if (!seen_subnets) throw ScenarioError("missing [subnets] section");
  if (!seen_topology) throw ScenarioError("missing [topology] section");

  // Assemble the adjacency matrix; rows index nodes 0..S where 0 = internet.
  const int nodes = s.subnet_count() + 1;
  for (const auto& [row, idx] : topo_rows) {
    if (idx < 0 || idx >= nodes)
      fail(topo_line, "topology row references unknown subnet " + std::to_string(idx) + " (scenario declares " +
                          std::to_string(s.subnet_count()) + " subnets)");
  }
  s.topology.assign(static_cast<std::size_t>(nodes), std::vector<bool>(static_cast<std::size_t>(nodes), false));
  std::vector<bool> row_seen(static_cast<std::size_t>(nodes), false);
  for (const auto& [row, idx] : topo_rows) {
    if (row_seen[static_cast<std::size_t>(idx)]) fail(topo_line, "duplicate topology row " + std::to_string(idx));
    row_seen[static_cast<std::size_t>(idx)] = true;
    if (static_cast<int>(row.size()) != nodes)
      fail(topo_line, "topology row " + std::to_string(idx) + " has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(nodes));
    s.topology[static_cast<std::size_t>(idx)] = row;
  }
  for (int i = 0; i < nodes; ++i) {
    if (!row_seen[static_cast<std::size_t>(i)]) fail(topo_line, "missing topology row " + std::to_string(i));
  }

  std::sort(s.hosts.begin(), s.hosts.end(),
            [](const Host& a, const Host& b) { return a.address < b.address; });
  return s;
}

Scenario parse_scenario(const std::string& text) {
  Scenario s = parse_scenario_document(text);
  const auto violations = validate(s);
  if (!violations.empty()) throw ScenarioError("invalid scenario:\n" + format_violations(violations));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<Violation> validate(const Scenario& s) {
  std::vector<Violation> out;
  const auto add = [&out](const std::string& field, const std::string& rule) {
    out.push_back({field, rule});
  };

  if (s.num_os < 1) add("meta.num_os", "must be a positive integer");
  if (s.num_services < 1) add("meta.num_services", "must be a positive integer");
  if (s.num_processes < 1) add("meta.num_processes", "must be a positive integer");
  if (s.step_budget < 1) add("meta.step_budget", "must be a positive integer");
  if (s.subnet_sizes.empty()) add("subnets", "at least one subnet required");
  for (std::size_t k = 0; k < s.subnet_sizes.size(); ++k) {
    if (s.subnet_sizes[k] < 0)
      add("subnets.sizes", "subnet " + std::to_string(k + 1) + " has negative size");
  }

  const int nodes = s.subnet_count() + 1;
  bool topology_ok = static_cast<int>(s.topology.size()) == nodes;
  if (topology_ok) {
    for (const auto& row : s.topology) topology_ok = topology_ok && static_cast<int>(row.size()) == nodes;
  }
  if (!topology_ok) {
    add("topology", "adjacency must be " + std::to_string(nodes) + "x" + std::to_string(nodes) +
                        " (subnets plus internet)");
  } else {
    for (int i = 0; i < nodes; ++i) {
      for (int j = i + 1; j < nodes; ++j) {
        if (s.adjacent(i, j) != s.adjacent(j, i)) {
          add("topology", "topology not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
      }
    }
    // Internet must reach every declared subnet.
    std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
    std::vector<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
      const int cur = queue.back();
      queue.pop_back();
      for (int next = 0; next < nodes; ++next) {
        if (!seen[static_cast<std::size_t>(next)] && s.adjacent(cur, next)) {
          seen[static_cast<std::size_t>(next)] = true;
          queue.push_back(next);
        }
      }
    }
    for (int k = 1; k < nodes; ++k) {
      if (!seen[static_cast<std::size_t>(k)])
        add("topology", "subnet " + std::to_string(k) + " is not connected to the entry point");
    }
  }

  if (s.hosts.empty()) add("hosts", "no hosts");
  std::set<std::pair<int, int>> addresses;
  std::vector<int> per_subnet(s.subnet_sizes.size(), 0);
  for (const auto& h : s.hosts) {
    const std::string tag = "host " + std::to_string(h.address.subnet) + "." + std::to_string(h.address.local);
    if (!addresses.insert({h.address.subnet, h.address.local}).second) add(tag, "duplicate address");
    if (h.address.subnet < 1 || h.address.subnet > s.subnet_count()) {
      add(tag, "unknown subnet " + std::to_string(h.address.subnet));
    } else {
      per_subnet[static_cast<std::size_t>(h.address.subnet - 1)] += 1;
      if (h.address.local < 0 || h.address.local >= s.subnet_sizes[static_cast<std::size_t>(h.address.subnet - 1)])
        add(tag, "local id " + std::to_string(h.address.local) + " outside declared subnet size");
    }
    if (h.os < 0 || h.os >= s.num_os) add(tag, "os id " + std::to_string(h.os) + " out of range");
    if (static_cast<int>(h.services.size()) != s.num_services)
      add(tag, "services vector length must equal num_services");
    if (static_cast<int>(h.processes.size()) != s.num_processes)
      add(tag, "processes vector length must equal num_processes");
    if (h.value < 0) add(tag, "value must be >= 0");
    if (h.sensitive && h.value <= 0) add(tag, "sensitive host must have value > 0");
  }
  for (std::size_t k = 0; k < per_subnet.size(); ++k) {
    if (k < s.subnet_sizes.size() && per_subnet[k] != s.subnet_sizes[k])
      add("subnets.sizes", "subnet " + std::to_string(k + 1) + " declares " + std::to_string(s.subnet_sizes[k]) +
                               " hosts but has " + std::to_string(per_subnet[k]));
  }
  if (std::none_of(s.hosts.begin(), s.hosts.end(), [](const Host& h) { return h.sensitive; }))
    add("hosts", "no goal host (no host has the sensitive flag)");

  std::set<std::string> exploit_names;
  for (const auto& e : s.exploits) {
    const std::string tag = "exploit " + e.name;
    if (!exploit_names.insert(e.name).second) add(tag, "duplicate exploit name");
    if (e.service < 0 || e.service >= s.num_services)
      add(tag, "service id " + std::to_string(e.service) + " out of range");
    if (e.os != kAnyOs && (e.os < 0 || e.os >= s.num_os))
      add(tag, "os id " + std::to_string(e.os) + " out of range");
    if (e.success_prob < 0.0 || e.success_prob > 1.0) add(tag, "prob must be within [0, 1]");
    if (e.cost < 0) add(tag, "cost must be >= 0");
    if (e.access == AccessLevel::None) add(tag, "granted access must be user or root");
  }
  std::set<std::string> privesc_names;
  for (const auto& p : s.privescs) {
    const std::string tag = "privesc " + p.name;
    if (!privesc_names.insert(p.name).second) add(tag, "duplicate privesc name");
    if (p.process < 0 || p.process >= s.num_processes)
      add(tag, "process id " + std::to_string(p.process) + " out of range");
    if (p.cost < 0) add(tag, "cost must be >= 0");
    if (p.access != AccessLevel::Root) add(tag, "granted access must be root");
  }
  if (s.scan_costs.service_scan < 0 || s.scan_costs.os_scan < 0 || s.scan_costs.process_scan < 0 ||
      s.scan_costs.subnet_scan < 0)
    add("costs", "scan costs must be >= 0");

  return out;
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[meta]\n";
  if (!s.name.empty()) out << "name = " << s.name << "\n";
  out << "mode = " << (s.mode == ActionMode::Nasim ? "nasim" : "cage") << "\n";
  out << "num_os = " << s.num_os << "\n";
  out << "num_services = " << s.num_services << "\n";
  out << "num_processes = " << s.num_processes << "\n";
  out << "step_budget = " << s.step_budget << "\n";

  out << "\n[subnets]\nsizes = ";
  for (std::size_t k = 0; k < s.subnet_sizes.size(); ++k)
    out << (k > 0 ? ", " : "") << s.subnet_sizes[k];
  out << "\n";

  out << "\n[topology]\n";
  for (std::size_t i = 0; i < s.topology.size(); ++i) {
    out << "row" << i << " = ";
    for (std::size_t j = 0; j < s.topology[i].size(); ++j)
      out << (j > 0 ? ", " : "") << (s.topology[i][j] ? 1 : 0);
    out << "\n";
  }

  out << "\n[costs]\n";
  out << "service_scan = " << fmt_double(s.scan_costs.service_scan) << "\n";
  out << "os_scan = " << fmt_double(s.scan_costs.os_scan) << "\n";
  out << "process_scan = " << fmt_double(s.scan_costs.process_scan) << "\n";
  out << "subnet_scan = " << fmt_double(s.scan_costs.subnet_scan) << "\n";

  for (const auto& h : s.hosts) {
    out << "\n[host " << h.address.subnet << "." << h.address.local << "]\n";
    out << "os = " << h.os << "\n";
    out << "services = ";
    for (std::size_t i = 0; i < h.services.size(); ++i) out << (i > 0 ? ", " : "") << (h.services[i] ? 1 : 0);
    out << "\nprocesses = ";
    for (std::size_t i = 0; i < h.processes.size(); ++i) out << (i > 0 ? ", " : "") << (h.processes[i] ? 1 : 0);
    out << "\nvalue = " << fmt_double(h.value) << "\n";
    out << "sensitive = " << (h.sensitive ? 1 : 0) << "\n";
  }

  for (const auto& e : s.exploits) {
    out << "\n[exploit " << e.name << "]\n";
    out << "service = " << e.service << "\n";
    out << "os = ";
    if (e.os == kAnyOs) {
      out << "any\n";
    } else {
      out << e.os << "\n";
    }
    out << "prob = " << fmt_double(e.success_prob) << "\n";
    out << "cost = " << fmt_double(e.cost) << "\n";
    out << "access = " << (e.access == AccessLevel::Root ? "root" : "user") << "\n";
  }

  for (const auto& p : s.privescs) {
    out << "\n[privesc " << p.name << "]\n";
    out << "process = " << p.process << "\n";
    out << "cost = " << fmt_double(p.cost) << "\n";
    out << "access = root\n";
  }

  return out.str();
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ScenarioError("cannot open file for writing: " + path.string());
  f << serialize_scenario(s);
  if (!f) throw ScenarioError("write failed: " + path.string());
}

long long nasim_action_space_size(long long hosts, long long exploits, long long privescs,
                                  long long scan_kinds) {
  return hosts * (exploits + privescs + scan_kinds);
}

long long cage_action_space_size(long long hosts, long long subnets, long long host_to_host_kinds,
                                 long long host_to_subnet_kinds, long long on_host_kinds) {
  return hosts * ((hosts - 1) * host_to_host_kinds + subnets * host_to_subnet_kinds + on_host_kinds);
}

long long action_space_size(const Scenario& s) {
  const long long hosts = s.host_count();
  const long long exploits = static_cast<long long>(s.exploits.size());
  const long long privescs = static_cast<long long>(s.privescs.size());
  if (s.mode == ActionMode::Nasim) return nasim_action_space_size(hosts, exploits, privescs, 4);
  // host-to-host = {service scan, os scan} + exploits; host-to-subnet =
  // {subnet scan}; on-host = {process scan} + privescs.
  return cage_action_space_size(hosts, s.subnet_count(), 2 + exploits, 1, 1 + privescs);
}

ScenarioTemplate parse_template(const std::string& name) {
  if (name == "small") return ScenarioTemplate::Small;
  if (name == "medium") return ScenarioTemplate::Medium;
  if (name == "large") return ScenarioTemplate::Large;
  throw ScenarioError("unknown template '" + name + "' (expected small, medium or large)");
}

bool solvable(const Scenario& s) {
  const int hosts = s.host_count();
  std::vector<bool> compromised(static_cast<std::size_t>(hosts), false);

  const auto exploitable = [&s](const Host& h) {
    for (const auto& e : s.exploits) {
      if (e.success_prob <= 0.0) continue;
      if (!h.services[static_cast<std::size_t>(e.service)]) continue;
      if (e.os != kAnyOs && e.os != h.os) continue;
      return true;
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < hosts; ++i) {
      if (compromised[static_cast<std::size_t>(i)]) continue;
      const Host& h = s.hosts[static_cast<std::size_t>(i)];
      bool reachable = s.entry_subnet(h.address.subnet);
      for (int j = 0; j < hosts && !reachable; ++j) {
        if (compromised[static_cast<std::size_t>(j)] &&
            s.same_or_adjacent(s.hosts[static_cast<std::size_t>(j)].address.subnet, h.address.subnet))
          reachable = true;
      }
      if (reachable && exploitable(h)) {
        compromised[static_cast<std::size_t>(i)] = true;
        changed = true;
      }
    }
  }
  for (int i = 0; i < hosts; ++i) {
    if (s.hosts[static_cast<std::size_t>(i)].sensitive && !compromised[static_cast<std::size_t>(i)])
      return false;
  }
  return true;
}

namespace {

struct TemplateSpec {
  int subnets, hosts, os, services, processes, step_budget, sensitive;
};

TemplateSpec template_spec(ScenarioTemplate tmpl) {
  switch (tmpl) {
    case ScenarioTemplate::Small: return {7, 8, 2, 3, 2, 200, 2};
    case ScenarioTemplate::Medium: return {6, 16, 2, 5, 3, 500, 2};
    case ScenarioTemplate::Large: return {8, 23, 3, 7, 3, 500, 3};
  }
  throw ScenarioError("unknown template");
}

Scenario generate_attempt(std::uint64_t seed, ScenarioTemplate tmpl, const std::string& name) {
  const TemplateSpec spec = template_spec(tmpl);
  Rng rng(seed);

  Scenario s;
  s.name = name;
  s.mode = ActionMode::Nasim;
  s.num_os = spec.os;
  s.num_services = spec.services;
  s.num_processes = spec.processes;
  s.step_budget = spec.step_budget;

  // Host counts per subnet: one each, remainder spread at random.
  s.subnet_sizes.assign(static_cast<std::size_t>(spec.subnets), 1);
  for (int extra = spec.hosts - spec.subnets; extra > 0; --extra)
    s.subnet_sizes[static_cast<std::size_t>(rng.uniform_int(spec.subnets))] += 1;

  // Random near-chain tree over subnets plus a few shortcut edges. Subnet 1 is
  // the single entry subnet.
  const int nodes = spec.subnets + 1;
  s.topology.assign(static_cast<std::size_t>(nodes), std::vector<bool>(static_cast<std::size_t>(nodes), false));
  const auto connect = [&s](int a, int b) {
    s.topology[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
    s.topology[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
  };
  connect(0, 1);
  for (int k = 2; k <= spec.subnets; ++k) {
    const int lo = std::max(1, k - 3);
    connect(k, lo + rng.uniform_int(k - lo));
  }
  for (int extra = spec.subnets / 4; extra > 0; --extra) {
    const int a = 1 + rng.uniform_int(spec.subnets);
    const int b = 1 + rng.uniform_int(spec.subnets);
    if (a != b) connect(a, b);
  }

  // Exploits: one per service, mixed OS requirements.
  for (int e = 0; e < spec.services; ++e) {
    Exploit ex;
    ex.name = "e_svc" + std::to_string(e);
    ex.service = e;
    ex.os = rng.bernoulli(0.5) ? kAnyOs : rng.uniform_int(spec.os);
    const double probs[3] = {0.8, 0.9, 1.0};
    ex.success_prob = probs[rng.uniform_int(3)];
    ex.cost = 1.0;
    ex.access = AccessLevel::User;
    s.exploits.push_back(std::move(ex));
  }
  // Privilege escalations: one per process.
  for (int p = 0; p < spec.processes; ++p) {
    PrivEsc pe;
    pe.name = "p_proc" + std::to_string(p);
    pe.process = p;
    pe.cost = 1.0;
    s.privescs.push_back(std::move(pe));
  }
  const auto any_os_services = [&s]() {
    std::vector<int> list;
    for (const auto& e : s.exploits) {
      if (e.os == kAnyOs) list.push_back(e.service);
    }
    return list;
  }();

  for (int subnet = 1; subnet <= spec.subnets; ++subnet) {
    for (int local = 0; local < s.subnet_sizes[static_cast<std::size_t>(subnet - 1)]; ++local) {
      Host h;
      h.address = {subnet, local};
      h.os = rng.uniform_int(spec.os);
      h.services.assign(static_cast<std::size_t>(spec.services), false);
      for (int svc = 0; svc < spec.services; ++svc) h.services[static_cast<std::size_t>(svc)] = rng.bernoulli(0.5);
      if (std::none_of(h.services.begin(), h.services.end(), [](bool b) { return b; }))
        h.services[static_cast<std::size_t>(rng.uniform_int(spec.services))] = true;
      // First host of each subnet carries a service with an any-OS exploit so a
      // compromisable backbone exists.
      if (local == 0 && !any_os_services.empty())
        h.services[static_cast<std::size_t>(any_os_services[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(any_os_services.size())))])] = true;
      h.processes.assign(static_cast<std::size_t>(spec.processes), false);
      for (int proc = 0; proc < spec.processes; ++proc)
        h.processes[static_cast<std::size_t>(proc)] = rng.bernoulli(0.5);
      s.hosts.push_back(std::move(h));
    }
  }

  // Goal hosts live in the subnets farthest from the entry point.
  std::vector<int> order(s.hosts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&s](int a, int b) {
    return s.hosts[static_cast<std::size_t>(a)].address.subnet > s.hosts[static_cast<std::size_t>(b)].address.subnet;
  });
  for (int k = 0; k < spec.sensitive && k < static_cast<int>(order.size()); ++k) {
    Host& h = s.hosts[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    h.sensitive = true;
    h.value = 100.0;
  }

  return s;
}

}  // namespace

Scenario generate_scenario(std::uint64_t seed, ScenarioTemplate tmpl) {
  const char* names[3] = {"small", "medium", "large"};
  const std::string name =
      std::string(names[static_cast<int>(tmpl)]) + "_" + std::to_string(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Scenario s = generate_attempt(derive_seed(seed, static_cast<std::uint64_t>(attempt)), tmpl, name);
    if (!validate(s).empty()) continue;
    if (!solvable(s)) continue;
    return s;
  }
  throw ScenarioError("could not generate a solvable scenario after 100 attempts");
}

}  // namespace clap
