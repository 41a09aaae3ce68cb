#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "clap/env.hpp"
#include "clap/pareto.hpp"
#include "clap/trainer.hpp"

namespace clap {

using EnvFactory = std::function<std::unique_ptr<MoEnv>()>;

// What a trained policy's objective vector is made of:
//   ReturnVector - the mean per-objective episode return as-is;
//   PenTest      - (negated mean actions-to-goal, mean privilege-access value),
//                  both oriented for maximization.
enum class SweepObjectives { ReturnVector, PenTest };

struct SweepConfig {
  int grid = 11;  // weights (i/(grid-1), 1 - i/(grid-1))
  std::vector<Scalarization> modes{Scalarization::Chebyshev, Scalarization::Linear};
  int seeds_per_cell = 3;
  int workers = 1;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 9000;
  SweepObjectives objectives = SweepObjectives::PenTest;
  TrainConfig base;
  std::filesystem::path out_dir;  // empty disables persistence and resume
};

struct SweepResult {
  std::vector<FrontPoint> best;       // best seed per (mode, weight) cell
  std::vector<FrontPoint> all;        // every (mode, weight, seed) outcome
  std::vector<std::string> failures;  // one message per failed cell
};

// Trains a policy per (mode, weight, seed) cell, evaluates it greedily and
// keeps the best seed per cell by the cell's own scalarization. Cells run
// independently across up to `workers` threads and completed cells found on
// disk are reused.
SweepResult sweep(const EnvFactory& make_env, const SweepConfig& config);

// Rebuilds best-per-cell front points from a sweep output directory
// (<dir>/<mode>/<w1>_<w2>/seed<k>/eval.csv).
std::vector<FrontPoint> collect_front_points(const std::filesystem::path& sweep_dir);

}  // namespace clap
