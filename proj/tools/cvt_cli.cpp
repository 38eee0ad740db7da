// cvt: competitive visual transfer experiment runner.
//
// Usage: cvt <command> --config <path> [--out <dir>] [--seed <n>] [--deterministic]
// Commands: train-source, train-transfer, train-baseline, evaluate, plot,
//           dump-activations, fit-mapper.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "checkpoint.hpp"
#include "config.hpp"
#include "metrics.hpp"
#include "preprocess.hpp"
#include "svg_plot.hpp"
#include "trainer.hpp"

namespace fs = std::filesystem;
using namespace cvt;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

Mapper build_mapper(const ExperimentConfig& cfg) {
  Mapper m;
  m.kind = cfg.mapper;
  if (cfg.mapper == MapperKind::Linear && cfg.ratio_mapped > 0)
    m.linear = load_linear_mapper(cfg.mapper_checkpoint);
  return m;
}

int run_training(const ExperimentConfig& cfg, Stage stage, const std::string& out_dir) {
  std::string tag = stage == Stage::Source ? "source" : stage == Stage::Transfer ? "transfer" : "baseline";
  RewardLogWriter writer(join(out_dir, tag + "_log.csv"));

  TrainConfig tc = cfg.to_train_config();
  tc.on_episode = [&](const EpisodeRecord& rec) { writer.append(rec); };
  std::string ckpt_path = join(out_dir, tag + ".ckpt");
  tc.on_checkpoint = [&](const ParameterSet& p, std::int64_t) { save_checkpoint(p, ckpt_path); };

  StageResult result;
  if (stage == Stage::Source) {
    result = train_stage1(tc);
  } else {
    std::optional<ParameterSet> source;
    if (stage == Stage::Transfer) source = load_checkpoint(cfg.source_checkpoint);
    tc.mapper = build_mapper(cfg);
    result = train_stage2(tc, source ? &*source : nullptr);
  }

  save_checkpoint(result.params, ckpt_path);
  const RewardLog native = result.log.filtered(WorkerKind::Native);
  double mean = 0.0;
  int tail = std::min<int>(100, static_cast<int>(native.episodes.size()));
  for (int i = 0; i < tail; ++i)
    mean += native.episodes[native.episodes.size() - 1 - i].total_reward;
  if (tail > 0) mean /= tail;
  std::printf("%s: %zu episodes (%zu native), final %d-episode mean reward %.3f\n", tag.c_str(),
              result.log.episodes.size(), native.episodes.size(), tail, mean);
  std::printf("checkpoint: %s\n", ckpt_path.c_str());
  return 0;
}

int run_evaluate(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.transfer_log_path.empty() || cfg.baseline_log_path.empty())
    throw std::runtime_error("evaluate needs log.transfer and log.baseline in the config");
  RewardLog transfer = read_reward_log(cfg.transfer_log_path).filtered(WorkerKind::Native);
  RewardLog baseline = read_reward_log(cfg.baseline_log_path).filtered(WorkerKind::Native);
  TransferMetrics m = compute_metrics(transfer, baseline, cfg.metrics);

  std::string report = render_metrics_report(m);
  std::fputs(report.c_str(), stdout);
  std::ofstream txt(join(out_dir, "metrics.txt"));
  txt << report;
  std::ofstream csv(join(out_dir, "metrics.csv"));
  csv << render_metrics_csv(m);
  return 0;
}

int run_plot(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.plot_logs.empty()) throw std::runtime_error("plot needs plot.logs in the config");
  std::vector<std::pair<std::string, RewardLog>> logs;
  for (const auto& [name, path] : cfg.plot_logs) logs.emplace_back(name, read_reward_log(path));
  std::string path = join(out_dir, "curves.svg");
  write_plot(logs, cfg.plot_smooth, path);
  std::printf("plot: %s\n", path.c_str());
  return 0;
}

void write_pgm(const Tensor& map, const std::string& path) {
  int h = map.shape[0], w = map.shape[1];
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << w << " " << h << "\n255\n";
  for (int i = 0; i < h * w; ++i)
    out.put(static_cast<char>(static_cast<unsigned char>(map[i] * 255.0 + 0.5)));
}

int run_dump_activations(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (cfg.dump_checkpoint.empty())
    throw std::runtime_error("dump-activations needs dump.checkpoint in the config");
  ParameterSet params = load_checkpoint(cfg.dump_checkpoint);
  EnvKind kind = params.desc.n_actions == 6 ? EnvKind::MiniPong : EnvKind::MiniBreakout;
  auto [state, frame] = env_reset(kind, cfg.seed);
  // a served ball makes the maps non-trivial
  env_step(state, 1);
  PreprocessedFrame obs = attention_preprocess(render(state), kind);

  int layers = static_cast<int>(params.desc.convs.size());
  int lo = cfg.dump_layer == 0 ? 1 : cfg.dump_layer;
  int hi = cfg.dump_layer == 0 ? layers : cfg.dump_layer;
  for (int layer = lo; layer <= hi; ++layer) {
    std::vector<Tensor> maps = dump_activations(params, obs, layer);
    for (std::size_t f = 0; f < maps.size(); ++f) {
      std::string path =
          join(out_dir, "layer" + std::to_string(layer) + "_map" + std::to_string(f) + ".pgm");
      write_pgm(maps[f], path);
    }
    std::printf("layer %d: %zu maps written\n", layer, maps.size());
  }
  return 0;
}

// Rolls a random-policy MiniPong episode stream and fits the linear mapper
// on (source attention map, analytic target attention map) pairs.
int run_fit_mapper(const ExperimentConfig& cfg, const std::string& out_dir) {
  Rng rng(cfg.seed);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  pairs.reserve(cfg.mapper_pairs);
  auto [state, frame] = env_reset(EnvKind::MiniPong, rng.next());
  while (static_cast<int>(pairs.size()) < cfg.mapper_pairs) {
    if (state.done) {
      auto [s2, f2] = env_reset(EnvKind::MiniPong, rng.next());
      state = s2;
    }
    StepResult sr = env_step(state, static_cast<int>(rng.below(6)));
    PreprocessedFrame src = attention_preprocess(sr.frame, EnvKind::MiniPong);
    PreprocessedFrame tgt = analytic_map(state);
    pairs.emplace_back(std::vector<double>(src.values.begin(), src.values.end()),
                       std::vector<double>(tgt.values.begin(), tgt.values.end()));
  }
  LinearMapper m = fit_linear_mapper(pairs, cfg.mapper_lambda);
  std::string path = join(out_dir, "mapper.ckpt");
  save_linear_mapper(m, path);
  std::printf("mapper: %d pairs, residual mse %.3g, saved %s\n", m.pair_count, m.residual_mse,
              path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"competitive visual transfer experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  bool deterministic_flag = false;

  const std::vector<std::string> commands = {"train-source", "train-transfer", "train-baseline",
                                             "evaluate",     "plot",           "dump-activations",
                                             "fit-mapper"};
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_flag("--deterministic", deterministic_flag, "force deterministic mode");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands()[0]->get_name();

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (deterministic_flag) cfg.deterministic = true;
    fs::create_directories(out_dir);

    if (command == "train-source") return run_training(cfg, Stage::Source, out_dir);
    if (command == "train-transfer") {
      if (cfg.source_checkpoint.empty())
        throw std::runtime_error("train-transfer requires checkpoint.source in the config");
      return run_training(cfg, Stage::Transfer, out_dir);
    }
    if (command == "train-baseline") return run_training(cfg, Stage::Baseline, out_dir);
    if (command == "evaluate") return run_evaluate(cfg, out_dir);
    if (command == "plot") return run_plot(cfg, out_dir);
    if (command == "dump-activations") return run_dump_activations(cfg, out_dir);
    if (command == "fit-mapper") return run_fit_mapper(cfg, out_dir);
    throw std::runtime_error("unknown command " + command);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
