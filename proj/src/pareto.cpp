#include "clap/pareto.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "clap/trainer.hpp"

namespace clap {

bool dominates(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b) {
  bool strictly_better = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return false;
    if (a[i] > b[i]) strictly_better = true;
  }
  return strictly_better;
}

std::vector<int> non_dominated_indices(const std::vector<Eigen::VectorXd>& points) {
  std::vector<int> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < points.size() && !drop; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) drop = true;
      // Identical vectors collapse to the first occurrence.
      if (j < i && points[j] == points[i]) drop = true;
    }
    if (!drop) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

std::vector<FrontPoint> pareto_filter(const std::vector<FrontPoint>& points) {
  std::vector<Eigen::VectorXd> objectives;
  objectives.reserve(points.size());
  for (const auto& p : points) objectives.push_back(p.objectives);
  std::vector<FrontPoint> out;
  for (int idx : non_dominated_indices(objectives)) out.push_back(points[static_cast<std::size_t>(idx)]);
  return out;
}

std::filesystem::path pareto_sibling_path(const std::filesystem::path& all_path) {
  std::string stem = all_path.stem().string();
  // front_all.csv pairs with front_pareto.csv; anything else gets _pareto.
  if (stem.size() >= 4 && stem.substr(stem.size() - 4) == "_all") {
    stem = stem.substr(0, stem.size() - 4);
  }
  std::filesystem::path sibling = all_path;
  sibling.replace_filename(stem + "_pareto" + all_path.extension().string());
  return sibling;
}

namespace {

void write_front_csv(const std::filesystem::path& path, const std::vector<FrontPoint>& points,
                     const std::vector<bool>& dominated, bool include_flag) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open front file for writing: " + path.string());
  f << "mode,w1,w2,obj1,obj2,seed,checkpoint";
  if (include_flag) f << ",dominated";
  f << "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    f << (p.mode == Scalarization::Chebyshev ? "chebyshev" : "linear");
    for (int k = 0; k < 2; ++k)
      f << ',' << (k < p.weights.size() ? format_csv_value(p.weights[k]) : std::string("0"));
    for (int k = 0; k < 2; ++k)
      f << ',' << (k < p.objectives.size() ? format_csv_value(p.objectives[k]) : std::string("0"));
    f << ',' << p.seed << ',' << p.checkpoint.generic_string();
    if (include_flag) f << ',' << (dominated[i] ? 1 : 0);
    f << "\n";
  }
  if (!f) throw std::runtime_error("front write failed: " + path.string());
}

}  // namespace

void export_front(const std::vector<FrontPoint>& points, const std::filesystem::path& all_path) {
  if (points.empty()) throw std::invalid_argument("export_front: no points to export");

  std::vector<FrontPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const FrontPoint& a, const FrontPoint& b) {
    if (a.mode != b.mode) return a.mode == Scalarization::Chebyshev;
    for (Eigen::Index i = 0; i < std::min(a.weights.size(), b.weights.size()); ++i) {
      if (a.weights[i] != b.weights[i]) return a.weights[i] < b.weights[i];
    }
    return a.seed < b.seed;
  });

  std::vector<Eigen::VectorXd> objectives;
  objectives.reserve(sorted.size());
  for (const auto& p : sorted) objectives.push_back(p.objectives);
  const std::vector<int> kept = non_dominated_indices(objectives);
  std::vector<bool> dominated(sorted.size(), true);
  for (int idx : kept) dominated[static_cast<std::size_t>(idx)] = false;

  write_front_csv(all_path, sorted, dominated, true);

  std::vector<FrontPoint> front;
  for (int idx : kept) front.push_back(sorted[static_cast<std::size_t>(idx)]);
  write_front_csv(pareto_sibling_path(all_path), front, {}, false);
}

}  // namespace clap
