#include "clap/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "clap/csv.hpp"
#include "clap/log.hpp"

namespace clap {

namespace {

struct Cell {
  Scalarization mode;
  Eigen::VectorXd weights;
  int weight_index;
  int seed_index;
};

struct CellOutcome {
  bool ok = false;
  std::string error;
  FrontPoint point;
  Eigen::VectorXd mean_return;  // for best-seed ranking
  Eigen::VectorXd utopia;       // the run's own utopian point at the end of training
};

std::string weight_dir_name(const Eigen::VectorXd& w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f_%.4f", w[0], w[1]);
  return buf;
}

std::string mode_name(Scalarization mode) {
  return mode == Scalarization::Chebyshev ? "chebyshev" : "linear";
}

Eigen::VectorXd objectives_from_report(const EvalReport& report, SweepObjectives kind) {
  Eigen::VectorXd obj(2);
  if (kind == SweepObjectives::ReturnVector) {
    obj = report.mean_return.head(2);
  } else {
    obj[0] = -report.mean_actions_to_goal;
    obj[1] = report.mean_return.size() > 1 ? report.mean_return[1] : 0.0;
  }
  return obj;
}

void write_eval_csv(const std::filesystem::path& path, const Cell& cell, std::uint64_t train_seed,
                    const EvalReport& report, const Eigen::VectorXd& objectives,
                    const Eigen::VectorXd& utopia, const std::filesystem::path& checkpoint) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw TrainError("cannot open eval file for writing: " + path.string());
  f << "mode,w1,w2,seed,episodes,mean_return_1,mean_return_2,actions_to_goal,privilege_gains,"
       "success_rate,obj1,obj2,z1,z2,checkpoint\n";
  f << mode_name(cell.mode) << ',' << format_csv_value(cell.weights[0]) << ','
    << format_csv_value(cell.weights[1]) << ',' << train_seed << ',' << report.episodes << ','
    << format_csv_value(report.mean_return[0]) << ','
    << format_csv_value(report.mean_return.size() > 1 ? report.mean_return[1] : 0.0) << ','
    << format_csv_value(report.mean_actions_to_goal) << ','
    << format_csv_value(report.mean_privilege_gains) << ',' << format_csv_value(report.success_rate) << ','
    << format_csv_value(objectives[0]) << ',' << format_csv_value(objectives[1]) << ','
    << format_csv_value(utopia[0]) << ',' << format_csv_value(utopia[1]) << ','
    << checkpoint.generic_string() << "\n";
}

// Best seed of one cell by the cell's own scalarization of the mean episode
// return. Chebyshev cells measure distance to the componentwise-max of the
// runs' own utopian points, so every seed is scored against one shared
// reference that dominated all training episodes.
std::size_t select_best_seed(const std::vector<CellOutcome>& outcomes, Scalarization mode,
                             const Eigen::VectorXd& weights) {
  Eigen::VectorXd reference = Eigen::VectorXd::Constant(2, -std::numeric_limits<double>::infinity());
  for (const auto& o : outcomes) reference = reference.cwiseMax(o.utopia);
  std::size_t best_idx = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double score = mode == Scalarization::Linear
                             ? linear_scalarize(outcomes[i].mean_return, weights)
                             : chebyshev_scalar(outcomes[i].mean_return, weights, reference);
    if (score > best_score) {
      best_score = score;
      best_idx = i;
    }
  }
  return best_idx;
}

bool load_cached_cell(const std::filesystem::path& dir, CellOutcome& outcome) {
  const auto eval_path = dir / "eval.csv";
  const auto ckpt_path = dir / "checkpoint.bin";
  if (!std::filesystem::exists(eval_path) || !std::filesystem::exists(ckpt_path)) return false;
  const CsvFile csv = read_csv(eval_path);
  if (csv.rows.size() != 1) return false;
  const auto& row = csv.rows.front();
  outcome.ok = true;
  outcome.point.mode =
      row[static_cast<std::size_t>(csv.column("mode"))] == "chebyshev" ? Scalarization::Chebyshev
                                                                       : Scalarization::Linear;
  outcome.point.weights.resize(2);
  outcome.point.weights[0] = csv_to_double(row[static_cast<std::size_t>(csv.column("w1"))]);
  outcome.point.weights[1] = csv_to_double(row[static_cast<std::size_t>(csv.column("w2"))]);
  outcome.point.objectives.resize(2);
  outcome.point.objectives[0] = csv_to_double(row[static_cast<std::size_t>(csv.column("obj1"))]);
  outcome.point.objectives[1] = csv_to_double(row[static_cast<std::size_t>(csv.column("obj2"))]);
  {
    // Seeds are full-width u64 values; double parsing would round them.
    const std::string& field = row[static_cast<std::size_t>(csv.column("seed"))];
    std::uint64_t seed = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), seed);
    if (res.ec != std::errc()) return false;
    outcome.point.seed = seed;
  }
  outcome.point.checkpoint = ckpt_path;
  outcome.mean_return.resize(2);
  outcome.mean_return[0] = csv_to_double(row[static_cast<std::size_t>(csv.column("mean_return_1"))]);
  outcome.mean_return[1] = csv_to_double(row[static_cast<std::size_t>(csv.column("mean_return_2"))]);
  outcome.utopia.resize(2);
  outcome.utopia[0] = csv_to_double(row[static_cast<std::size_t>(csv.column("z1"))]);
  outcome.utopia[1] = csv_to_double(row[static_cast<std::size_t>(csv.column("z2"))]);
  return true;
}

}  // namespace

SweepResult sweep(const EnvFactory& make_env, const SweepConfig& config) {
  if (config.grid < 2) throw TrainError("sweep grid must be at least 2");
  {
    const auto probe = make_env();
    if (probe->objective_count() != 2)
      throw TrainError("sweep requires a two-objective environment");
  }

  std::vector<Cell> cells;
  for (const Scalarization mode : config.modes) {
    for (int i = 0; i < config.grid; ++i) {
      const double w1 = static_cast<double>(i) / static_cast<double>(config.grid - 1);
      Eigen::VectorXd w(2);
      w[0] = w1;
      w[1] = 1.0 - w1;
      for (int k = 0; k < config.seeds_per_cell; ++k)
        cells.push_back({mode, w, i, k});
    }
  }

  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  const auto run_cell = [&](std::size_t cell_index) {
    const Cell& cell = cells[cell_index];
    CellOutcome& outcome = outcomes[cell_index];
    std::filesystem::path dir;
    if (!config.out_dir.empty()) {
      dir = config.out_dir / mode_name(cell.mode) / weight_dir_name(cell.weights) /
            ("seed" + std::to_string(cell.seed_index));
      if (load_cached_cell(dir, outcome)) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log_debug("sweep: reusing " + dir.string());
        return;
      }
      std::filesystem::create_directories(dir);
    }
    try {
      TrainConfig cell_cfg = config.base;
      cell_cfg.mode = cell.mode;
      cell_cfg.weights = cell.weights;
      const std::uint64_t tag = (cell.mode == Scalarization::Chebyshev ? 0u : 1000000u) +
                                static_cast<std::uint64_t>(cell.weight_index) * 1000u +
                                static_cast<std::uint64_t>(cell.seed_index);
      cell_cfg.seed = derive_seed(config.base.seed, 50000 + tag);

      auto env = make_env();
      TrainResult trained = train(*env, cell_cfg, dir);

      auto eval_env = make_env();
      const EvalReport report =
          evaluate_policy(trained.policy, *eval_env, config.eval_episodes, config.eval_seed);

      outcome.ok = true;
      outcome.mean_return = report.mean_return;
      outcome.utopia = trained.utopia.utopia();
      outcome.point.mode = cell.mode;
      outcome.point.weights = cell.weights;
      outcome.point.objectives = objectives_from_report(report, config.objectives);
      outcome.point.seed = cell_cfg.seed;
      outcome.point.checkpoint = trained.checkpoint_path;
      if (!dir.empty())
        write_eval_csv(dir / "eval.csv", cell, cell_cfg.seed, report, outcome.point.objectives,
                       outcome.utopia, trained.checkpoint_path);
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = mode_name(cell.mode) + "/" + weight_dir_name(cell.weights) + "/seed" +
                      std::to_string(cell.seed_index) + ": " + e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) run_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!outcomes[i].ok) {
      if (!outcomes[i].error.empty()) result.failures.push_back(outcomes[i].error);
      continue;
    }
    result.all.push_back(outcomes[i].point);
  }

  for (std::size_t base = 0; base < cells.size(); base += static_cast<std::size_t>(config.seeds_per_cell)) {
    std::vector<std::size_t> done;
    std::vector<CellOutcome> cell_outcomes;
    for (int k = 0; k < config.seeds_per_cell; ++k) {
      const std::size_t idx = base + static_cast<std::size_t>(k);
      if (outcomes[idx].ok) {
        done.push_back(idx);
        cell_outcomes.push_back(outcomes[idx]);
      }
    }
    if (done.empty()) continue;
    const Cell& cell = cells[base];
    const std::size_t best = select_best_seed(cell_outcomes, cell.mode, cell.weights);
    result.best.push_back(outcomes[done[best]].point);
  }
  return result;
}

std::vector<FrontPoint> collect_front_points(const std::filesystem::path& sweep_dir) {
  std::vector<FrontPoint> best;
  for (const char* mode_dir : {"chebyshev", "linear"}) {
    const auto mode_path = sweep_dir / mode_dir;
    if (!std::filesystem::is_directory(mode_path)) continue;
    std::vector<std::filesystem::path> weight_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(mode_path)) {
      if (entry.is_directory()) weight_dirs.push_back(entry.path());
    }
    std::sort(weight_dirs.begin(), weight_dirs.end());
    for (const auto& weight_dir : weight_dirs) {
      std::vector<std::filesystem::path> seed_dirs;
      for (const auto& entry : std::filesystem::directory_iterator(weight_dir)) {
        if (entry.is_directory()) seed_dirs.push_back(entry.path());
      }
      std::sort(seed_dirs.begin(), seed_dirs.end());
      std::vector<CellOutcome> outcomes;
      for (const auto& seed_dir : seed_dirs) {
        CellOutcome outcome;
        if (load_cached_cell(seed_dir, outcome)) outcomes.push_back(std::move(outcome));
      }
      if (outcomes.empty()) continue;
      const std::size_t pick =
          select_best_seed(outcomes, outcomes.front().point.mode, outcomes.front().point.weights);
      best.push_back(outcomes[pick].point);
    }
  }
  return best;
}

}  // namespace clap
