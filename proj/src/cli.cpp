#include "clap/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "clap/csv.hpp"
#include "clap/env.hpp"
#include "clap/pareto.hpp"
#include "clap/plotting.hpp"
#include "clap/scenario.hpp"
#include "clap/sweep.hpp"
#include "clap/trainer.hpp"

namespace clap {

namespace {

constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
  return out;
}

Eigen::VectorXd parse_weights(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) values.push_back(std::stod(part));
  Eigen::VectorXd w(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) w[static_cast<Eigen::Index>(i)] = values[i];
  return w;
}

Scalarization parse_mode(const std::string& text) {
  if (text == "chebyshev") return Scalarization::Chebyshev;
  if (text == "linear") return Scalarization::Linear;
  throw CLI::ValidationError("--mode", "expected 'chebyshev' or 'linear'");
}

void print_banner(const std::string& command, const std::string& body) {
  std::istringstream in(body);
  std::string line;
  std::cout << "# command=" << command << "\n";
  while (std::getline(in, line)) {
    if (!line.empty()) std::cout << "# " << line << "\n";
  }
}

struct TrainFlags {
  std::string scenario;
  std::string out;
  std::string mode = "chebyshev";
  std::string weights;
  int objectives = 2;
  bool no_coverage = false;
  bool zero_cost = false;
  bool cheby_literal_sign = false;
  std::string extractor_hidden, weight_hidden, critic_hidden, rnd_hidden;
  TrainConfig config;
};

void add_train_options(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--scenario", flags.scenario, "scenario document")->required();
  cmd->add_option("--mode", flags.mode, "scalarization: chebyshev|linear");
  cmd->add_option("--w", flags.weights, "preference weights, e.g. 0.5,0.5");
  cmd->add_option("--steps", flags.config.total_steps, "total environment steps");
  cmd->add_option("--seed", flags.config.seed, "master random seed");
  cmd->add_option("--objectives", flags.objectives, "objective count (1 or 2)");
  cmd->add_option("--gamma", flags.config.gamma, "discount factor");
  cmd->add_option("--lambda", flags.config.lambda, "GAE lambda");
  cmd->add_option("--clip", flags.config.clip, "PPO clip range");
  cmd->add_option("--epochs", flags.config.epochs, "PPO epochs per update");
  cmd->add_option("--minibatch", flags.config.minibatch, "minibatch size");
  cmd->add_option("--horizon", flags.config.horizon, "rollout length per update");
  cmd->add_option("--lr", flags.config.learning_rate, "Adam learning rate");
  cmd->add_option("--c-int", flags.config.intrinsic_coef, "intrinsic advantage weight");
  cmd->add_option("--c-cov", flags.config.coverage_coef, "coverage loss coefficient");
  cmd->add_option("--ent-coef", flags.config.entropy_coef, "entropy bonus coefficient");
  cmd->add_option("--tau", flags.config.tau, "utopian point offset");
  cmd->add_option("--kappa", flags.config.kappa, "coverage fusion scale");
  cmd->add_option("--warmup", flags.config.warmup_steps, "warm-up steps (-1 = horizon)");
  cmd->add_option("--checkpoint-every", flags.config.checkpoint_every, "checkpoint cadence in steps");
  cmd->add_flag("--no-coverage", flags.no_coverage, "disable the coverage fusion and loss");
  cmd->add_flag("--zero-cost", flags.zero_cost, "drop action costs from the reward");
  cmd->add_flag("--cheby-literal-sign", flags.cheby_literal_sign,
                "use the raw Chebyshev distance as the critic scalar");
  cmd->add_option("--extractor-hidden", flags.extractor_hidden, "extractor hidden sizes, e.g. 256,256");
  cmd->add_option("--weight-hidden", flags.weight_hidden, "fusion weight net hidden sizes");
  cmd->add_option("--critic-hidden", flags.critic_hidden, "critic hidden sizes");
  cmd->add_option("--rnd-hidden", flags.rnd_hidden, "RND net hidden sizes");
  cmd->add_option("--rnd-features", flags.config.rnd_features, "RND feature dimension");
}

TrainConfig resolve_train_config(TrainFlags& flags) {
  TrainConfig cfg = flags.config;
  cfg.mode = parse_mode(flags.mode);
  if (!flags.weights.empty()) cfg.weights = parse_weights(flags.weights);
  cfg.coverage = !flags.no_coverage;
  cfg.cheby_literal_sign = flags.cheby_literal_sign;
  if (!flags.extractor_hidden.empty()) cfg.extractor_hidden = parse_int_list(flags.extractor_hidden);
  if (!flags.weight_hidden.empty()) cfg.weight_hidden = parse_int_list(flags.weight_hidden);
  if (!flags.critic_hidden.empty()) cfg.critic_hidden = parse_int_list(flags.critic_hidden);
  if (!flags.rnd_hidden.empty()) cfg.rnd_hidden = parse_int_list(flags.rnd_hidden);
  return cfg;
}

void write_eval_report_csv(const std::filesystem::path& path, const EvalReport& report,
                           const std::string& banner) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw CsvError("cannot open eval output for writing: " + path.string());
  std::istringstream in(banner);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) f << "# " << line << "\n";
  }
  f << "episodes,mean_return_1,mean_return_2,actions_to_goal,privilege_gains,success_rate\n";
  f << report.episodes << ',' << format_csv_value(report.mean_return[0]) << ','
    << format_csv_value(report.mean_return.size() > 1 ? report.mean_return[1] : 0.0) << ','
    << format_csv_value(report.mean_actions_to_goal) << ','
    << format_csv_value(report.mean_privilege_gains) << ',' << format_csv_value(report.success_rate)
    << "\n";
}

void print_eval_report(const EvalReport& report) {
  std::cout << "episodes: " << report.episodes << "\n";
  std::cout << "mean_return:";
  for (Eigen::Index i = 0; i < report.mean_return.size(); ++i)
    std::cout << ' ' << format_csv_value(report.mean_return[i]);
  std::cout << "\n";
  std::cout << "actions_to_goal: " << format_csv_value(report.mean_actions_to_goal) << "\n";
  std::cout << "privilege_gains: " << format_csv_value(report.mean_privilege_gains) << "\n";
  std::cout << "success_rate: " << format_csv_value(report.success_rate) << "\n";
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"network attack policy training"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a scenario document");
  validate_cmd->add_option("file", validate_path, "scenario document")->required();

  // gen
  std::string gen_template = "small", gen_out;
  std::uint64_t gen_seed = 1;
  auto* gen_cmd = app.add_subcommand("gen", "generate a scenario from a template");
  gen_cmd->add_option("--template", gen_template, "small|medium|large")->required();
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--out", gen_out, "output scenario path")->required();

  // train
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train an attack policy");
  add_train_options(train_cmd, train_flags);
  train_cmd->add_option("--out", train_flags.out, "output directory")->required();

  // eval
  std::string eval_checkpoint, eval_scenario, eval_out, eval_trajectories;
  int eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--scenario", eval_scenario, "scenario document")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
  eval_cmd->add_option("--out", eval_out, "write the report as CSV");
  eval_cmd->add_option("--trajectories", eval_trajectories, "write per-step trajectory records");

  // sweep
  TrainFlags sweep_flags;
  int sweep_grid = 11, sweep_seeds = 3, sweep_workers = 1, sweep_episodes = 100;
  std::string sweep_modes = "chebyshev,linear", sweep_objectives = "pentest";
  std::uint64_t sweep_eval_seed = 9000;
  auto* sweep_cmd = app.add_subcommand("sweep", "train across a weight grid and build front data");
  add_train_options(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--out", sweep_flags.out, "output directory")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "number of weights on the simplex grid");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per cell");
  sweep_cmd->add_option("--workers", sweep_workers, "parallel cell workers");
  sweep_cmd->add_option("--episodes", sweep_episodes, "evaluation episodes per cell");
  sweep_cmd->add_option("--eval-seed", sweep_eval_seed, "evaluation seed");
  sweep_cmd->add_option("--modes", sweep_modes, "comma list of scalarization modes");
  sweep_cmd->add_option("--objectives-kind", sweep_objectives, "pentest|returns");

  // front
  std::string front_in, front_out;
  auto* front_cmd = app.add_subcommand("front", "export front CSVs from a sweep directory");
  front_cmd->add_option("--in", front_in, "sweep output directory")->required();
  front_cmd->add_option("--out", front_out, "front CSV path (pareto sibling derived)")->required();

  // plot
  std::string plot_metrics, plot_front, plot_out;
  int plot_downsample = 100, plot_smooth = 10;
  auto* plot_cmd = app.add_subcommand("plot", "emit plot-ready series from metrics or front files");
  plot_cmd->add_option("--metrics", plot_metrics, "training metrics CSV");
  plot_cmd->add_option("--front", plot_front, "front CSV");
  plot_cmd->add_option("--out", plot_out, "output CSV path")->required();
  plot_cmd->add_option("--downsample", plot_downsample, "target row count for curves");
  plot_cmd->add_option("--smooth", plot_smooth, "moving-average window");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Prints help to stdout or the error plus usage hint to stderr.
    return app.exit(e) == 0 ? kOk : kValidationError;
  }

  if (validate_cmd->parsed()) {
    std::ifstream f(validate_path);
    if (!f) {
      std::cerr << "error: cannot open scenario file: " << validate_path << "\n";
      return kValidationError;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    Scenario s;
    try {
      s = parse_scenario_document(buf.str());
    } catch (const ScenarioError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kValidationError;
    }
    const auto violations = validate(s);
    if (violations.empty()) {
      std::cout << "ok: " << validate_path << " (" << s.host_count() << " hosts, " << s.subnet_count()
                << " subnets, |A|=" << action_space_size(s) << ")\n";
      return kOk;
    }
    std::cerr << format_violations(violations) << "\n";
    return kValidationError;
  }

  if (gen_cmd->parsed()) {
    print_banner("gen", "template=" + gen_template + "\nseed=" + std::to_string(gen_seed) +
                            "\nout=" + gen_out);
    const Scenario s = generate_scenario(gen_seed, parse_template(gen_template));
    save_scenario(s, gen_out);
    std::cout << "wrote " << gen_out << " (" << s.host_count() << " hosts, " << s.subnet_count()
              << " subnets, |A|=" << action_space_size(s) << ")\n";
    return kOk;
  }

  if (train_cmd->parsed()) {
    const Scenario scenario = load_scenario(train_flags.scenario);
    TrainConfig cfg = resolve_train_config(train_flags);
    NetworkEnvOptions env_options;
    env_options.objectives = train_flags.objectives;
    env_options.zero_action_cost = train_flags.zero_cost;
    NetworkEnv env(scenario, env_options);
    cfg.weights = effective_weights(cfg, env.objective_count());
    print_banner("train", "scenario=" + train_flags.scenario + "\nout=" + train_flags.out +
                              "\nobjectives=" + std::to_string(train_flags.objectives) +
                              "\nzero_cost=" + std::to_string(train_flags.zero_cost ? 1 : 0) + "\n" +
                              describe(cfg));
    const TrainResult result = train(env, cfg, train_flags.out);
    const MetricsRow& last = result.metrics.back();
    std::cout << "trained " << last.step << " steps; episode_return=("
              << format_csv_value(last.episode_return_obj1) << ","
              << format_csv_value(last.episode_return_obj2)
              << ") success_rate=" << format_csv_value(last.success_rate) << "\n";
    std::cout << "checkpoint: " << result.checkpoint_path.generic_string() << "\n";
    std::cout << "metrics: " << (std::filesystem::path(train_flags.out) / "metrics.csv").generic_string()
              << "\n";
    return kOk;
  }

  if (eval_cmd->parsed()) {
    const Checkpoint ckpt = load_checkpoint(eval_checkpoint);
    const Scenario scenario = load_scenario(eval_scenario);
    NetworkEnvOptions env_options;
    env_options.objectives = ckpt.policy.config.objectives;
    NetworkEnv env(scenario, env_options);
    const std::string banner = "checkpoint=" + eval_checkpoint + "\nscenario=" + eval_scenario +
                               "\nepisodes=" + std::to_string(eval_episodes) +
                               "\nseed=" + std::to_string(eval_seed);
    print_banner("eval", banner);
    std::ofstream trajectory_file;
    if (!eval_trajectories.empty()) {
      trajectory_file.open(eval_trajectories, std::ios::trunc);
      if (!trajectory_file) throw CsvError("cannot open trajectory log: " + eval_trajectories);
      trajectory_file << "step,action,name";
      for (int i = 0; i < env.objective_count(); ++i) trajectory_file << ",r" << (i + 1);
      trajectory_file << ",done\n";
      env.set_trajectory_log(&trajectory_file);
    }
    const EvalReport report = evaluate_policy(ckpt.policy, env, eval_episodes, eval_seed);
    print_eval_report(report);
    if (!eval_out.empty()) write_eval_report_csv(eval_out, report, "command=eval\n" + banner);
    return kOk;
  }

  if (sweep_cmd->parsed()) {
    const Scenario scenario = load_scenario(sweep_flags.scenario);
    SweepConfig cfg;
    cfg.base = resolve_train_config(sweep_flags);
    cfg.grid = sweep_grid;
    cfg.seeds_per_cell = sweep_seeds;
    cfg.workers = sweep_workers;
    cfg.eval_episodes = sweep_episodes;
    cfg.eval_seed = sweep_eval_seed;
    cfg.out_dir = sweep_flags.out;
    cfg.objectives = sweep_objectives == "returns" ? SweepObjectives::ReturnVector : SweepObjectives::PenTest;
    cfg.modes.clear();
    {
      std::stringstream ss(sweep_modes);
      std::string part;
      while (std::getline(ss, part, ',')) cfg.modes.push_back(parse_mode(part));
    }
    print_banner("sweep", "scenario=" + sweep_flags.scenario + "\nout=" + sweep_flags.out +
                              "\ngrid=" + std::to_string(cfg.grid) +
                              "\nseeds=" + std::to_string(cfg.seeds_per_cell) +
                              "\nworkers=" + std::to_string(cfg.workers) +
                              "\nepisodes=" + std::to_string(cfg.eval_episodes) + "\nmodes=" + sweep_modes +
                              "\nobjectives_kind=" + sweep_objectives + "\n" + describe(cfg.base));
    const bool zero_cost = sweep_flags.zero_cost;
    const int objectives = sweep_flags.objectives;
    const EnvFactory factory = [scenario, zero_cost, objectives]() -> std::unique_ptr<MoEnv> {
      NetworkEnvOptions options;
      options.objectives = objectives;
      options.zero_action_cost = zero_cost;
      return std::make_unique<NetworkEnv>(scenario, options);
    };
    const SweepResult result = sweep(factory, cfg);
    for (const auto& failure : result.failures) std::cerr << "cell failed: " << failure << "\n";
    if (!result.best.empty()) {
      export_front(result.best, cfg.out_dir / "front_all.csv");
      std::cout << "cells: " << result.all.size() << " ok, " << result.failures.size() << " failed\n";
      std::cout << "front: " << (cfg.out_dir / "front_all.csv").generic_string() << " and "
                << pareto_sibling_path(cfg.out_dir / "front_all.csv").generic_string() << "\n";
    }
    return result.failures.empty() ? kOk : kRuntimeError;
  }

  if (front_cmd->parsed()) {
    print_banner("front", "in=" + front_in + "\nout=" + front_out);
    const auto points = collect_front_points(front_in);
    export_front(points, front_out);
    std::cout << "wrote " << front_out << " (" << points.size() << " points) and "
              << pareto_sibling_path(front_out).generic_string() << "\n";
    return kOk;
  }

  if (plot_cmd->parsed()) {
    if (plot_metrics.empty() == plot_front.empty())
      throw CLI::ValidationError("plot", "exactly one of --metrics or --front is required");
    print_banner("plot", "metrics=" + plot_metrics + "\nfront=" + plot_front + "\nout=" + plot_out +
                             "\ndownsample=" + std::to_string(plot_downsample) +
                             "\nsmooth=" + std::to_string(plot_smooth));
    if (!plot_metrics.empty()) {
      emit_learning_curve(plot_metrics, plot_out, plot_downsample, plot_smooth);
    } else {
      emit_front_scatter(plot_front, plot_out);
    }
    std::cout << "wrote " << plot_out << "\n";
    return kOk;
  }

  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  try {
    return dispatch(args);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace clap
