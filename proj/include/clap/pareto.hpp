#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "clap/scalarize.hpp"

namespace clap {

// One trained policy's achieved objective vector, with provenance. All
// objectives are oriented for maximization (actions-to-goal enters negated).
struct FrontPoint {
  Scalarization mode = Scalarization::Chebyshev;
  Eigen::VectorXd weights;
  Eigen::VectorXd objectives;
  std::filesystem::path checkpoint;
  std::uint64_t seed = 0;
};

// a dominates b: at least as good in every component, strictly better in one.
bool dominates(Eigen::Ref<const Eigen::VectorXd> a, Eigen::Ref<const Eigen::VectorXd> b);

// Indices of the non-dominated subset, in input order; exact duplicates of an
// earlier vector are dropped.
std::vector<int> non_dominated_indices(const std::vector<Eigen::VectorXd>& points);

std::vector<FrontPoint> pareto_filter(const std::vector<FrontPoint>& points);

// Writes `all_path` with one row per point (dominated flag included) and a
// sibling "<stem>_pareto<ext>" holding only the non-dominated subset. Rows are
// sorted by (mode, weights, seed) so re-export is byte-identical.
void export_front(const std::vector<FrontPoint>& points, const std::filesystem::path& all_path);

std::filesystem::path pareto_sibling_path(const std::filesystem::path& all_path);

}  // namespace clap
