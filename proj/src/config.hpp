#pragma once

#include <cstdint>
#include <string>

#include "metrics.hpp"
#include "policy_net.hpp"
#include "trainer.hpp"

namespace cvt {

enum class Stage { Source, Transfer, Baseline };

// Plain key=value experiment configuration, one key per line, '#' comments.
// Unknown keys and out-of-range values are rejected with the key named in
// the error. See README for the full key list.
struct ExperimentConfig {
  Stage stage = Stage::Source;
  std::uint64_t seed = 42;
  std::uint64_t init_seed = 1;
  int workers = 4;
  int ratio_native = 1;
  int ratio_mapped = 0;
  int episodes = 1000;
  bool deterministic = true;
  MapperKind mapper = MapperKind::Analytic;
  ControlMode control = ControlMode::Pullback;
  int checkpoint_every = 0;

  NetDescriptor net;  // n_actions is set by the stage at run time

  double gamma = 0.99;
  int t_max = 5;
  double lr = 7e-4;
  double beta_entropy = 0.01;
  double c_value = 0.5;
  double rms_decay = 0.99;
  double rms_eps = 0.1;

  MetricParams metrics;

  std::string source_checkpoint;  // required for the transfer stage
  std::string mapper_checkpoint;  // fitted LinearMapper, mapper=linear only

  // evaluate
  std::string transfer_log_path;
  std::string baseline_log_path;
  // plot
  std::vector<std::pair<std::string, std::string>> plot_logs;  // name=path entries
  int plot_smooth = 10;
  // dump-activations
  std::string dump_checkpoint;
  int dump_layer = 0;  // 0 = every conv layer
  // fit-mapper
  int mapper_pairs = 200;
  double mapper_lambda = 1e-3;

  TrainConfig to_train_config() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace cvt
