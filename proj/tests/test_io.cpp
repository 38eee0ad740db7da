#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "checkpoint.hpp"
#include "config.hpp"
#include "reward_log.hpp"
#include "rng.hpp"
#include "svg_plot.hpp"

using namespace cvt;

namespace {

std::filesystem::path temp_file(const std::string& stem) {
  return std::filesystem::temp_directory_path() / ("cvt_test_" + stem);
}

RewardLog sample_log(std::uint64_t seed, std::size_t n) {
  Rng rng{seed};
  RewardLog log;
  for (std::size_t i = 0; i < n; ++i) {
    EpisodeRecord rec;
    rec.episode = static_cast<std::int64_t>(i) + 1;
    rec.total_reward = rng.uniform(-5.0, 24.0);
    rec.steps = static_cast<int>(rng.below(1000)) + 1;
    rec.wall_ms = static_cast<std::int64_t>(rng.below(100000));
    rec.kind = rng.below(2) == 0 ? WorkerKind::Native : WorkerKind::Mapped;
    log.episodes.push_back(rec);
  }
  return log;
}

}  // namespace

TEST_CASE("config: defaults from a minimal file") {
  ExperimentConfig cfg = parse_config_text("stage=source\n");
  CHECK(cfg.stage == Stage::Source);
  CHECK(cfg.seed == 42);
  CHECK(cfg.workers == 4);
  CHECK(cfg.ratio_native == 1);
  CHECK(cfg.ratio_mapped == 0);
  CHECK(cfg.episodes == 1000);
  CHECK(cfg.deterministic);
  CHECK(cfg.gamma == doctest::Approx(0.99));
  CHECK(cfg.t_max == 5);
  CHECK(cfg.lr == doctest::Approx(7e-4));
  CHECK(cfg.beta_entropy == doctest::Approx(0.01));
  CHECK(cfg.c_value == doctest::Approx(0.5));
  CHECK(cfg.metrics.threshold == doctest::Approx(12.0));
  CHECK(cfg.metrics.window == 10);
  CHECK(cfg.metrics.jumpstart_k == 50);
  CHECK(cfg.metrics.auc_budget == 700);
  CHECK(cfg.net.hidden == 64);
  CHECK(cfg.net.convs.size() == 4);
}

TEST_CASE("config: explicit keys, comments and blank lines") {
  ExperimentConfig cfg = parse_config_text(
      "# experiment\n"
      "stage=transfer\n"
      "seed=7\n"
      "\n"
      "workers=6\n"
      "ratio=2:1\n"
      "episodes=3000\n"
      "deterministic=false\n"
      "mapper=linear\n"
      "control=expert-replay\n"
      "net.hidden=32\n"
      "net.convs=4s2,4s2\n"
      "train.gamma=0.95\n"
      "train.lr=0.001\n"
      "metrics.threshold=10\n"
      "checkpoint.source=src.ckpt\n"
      "checkpoint.mapper=map.ckpt\n");
  CHECK(cfg.stage == Stage::Transfer);
  CHECK(cfg.seed == 7);
  CHECK(cfg.workers == 6);
  CHECK(cfg.ratio_native == 2);
  CHECK(cfg.ratio_mapped == 1);
  CHECK(cfg.episodes == 3000);
  CHECK(!cfg.deterministic);
  CHECK(cfg.mapper == MapperKind::Linear);
  CHECK(cfg.control == ControlMode::ExpertReplay);
  CHECK(cfg.net.hidden == 32);
  REQUIRE(cfg.net.convs.size() == 2);
  CHECK(cfg.net.convs[0] == ConvSpec{4, 2});
  CHECK(cfg.gamma == doctest::Approx(0.95));
  CHECK(cfg.lr == doctest::Approx(0.001));
  CHECK(cfg.metrics.threshold == doctest::Approx(10.0));
  CHECK(cfg.source_checkpoint == "src.ckpt");

  TrainConfig tc = cfg.to_train_config();
  CHECK(tc.workers == 6);
  CHECK(tc.ratio_native == 2);
  CHECK(tc.ratio_mapped == 1);
  CHECK(tc.gamma == doctest::Approx(0.95));
  CHECK(tc.opt.lr == doctest::Approx(0.001));
  CHECK(tc.control == ControlMode::ExpertReplay);
}

namespace {

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_config_text(text);
    FAIL_CHECK("expected a config error mentioning '" << needle << "'");
  } catch (const std::runtime_error& e) {
    CAPTURE(e.what());
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("config: errors name the offending key") {
  expect_config_error("stage=source\ntrain.gamma=1.5\n", "train.gamma");
  expect_config_error("stage=source\nworkers=0\n", "workers");
  expect_config_error("stage=source\nworkers=500\n", "workers");
  expect_config_error("stage=source\nratio=2\n", "ratio");
  expect_config_error("stage=source\nbogus.key=1\n", "bogus.key");
  expect_config_error("stage=source\nnonsense line\n", "line 2");
  expect_config_error("stage=nowhere\n", "stage");
  // transfer without a source checkpoint is unusable
  expect_config_error("stage=transfer\n", "checkpoint.source");
  // linear mapper with mapped workers but no fitted weights is unusable
  expect_config_error("stage=baseline\nratio=1:1\nmapper=linear\n", "checkpoint.mapper");
}

TEST_CASE("config: load_config reads a file") {
  auto path = temp_file("config.cfg");
  {
    std::ofstream out(path);
    out << "stage=baseline\nepisodes=12\n";
  }
  ExperimentConfig cfg = load_config(path.string());
  CHECK(cfg.stage == Stage::Baseline);
  CHECK(cfg.episodes == 12);
  std::filesystem::remove(path);
  CHECK_THROWS(load_config(path.string()));
}

TEST_CASE("checkpoint: float32-valued parameters survive bitwise") {
  NetDescriptor d;
  d.convs = {{2, 4}, {2, 2}};
  d.hidden = 8;
  d.n_actions = 6;
  ParameterSet p = quantize_to_f32(init_params(d, 5));
  auto path = temp_file("net.ckpt");
  save_checkpoint(p, path.string());
  ParameterSet back = load_checkpoint(path.string());
  CHECK(back == p);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint: quantization is idempotent") {
  NetDescriptor d;
  d.convs = {{2, 2}};
  d.hidden = 4;
  ParameterSet p = init_params(d, 11);
  ParameterSet q = quantize_to_f32(p);
  CHECK(quantize_to_f32(q) == q);
}

TEST_CASE("checkpoint: corrupt files are rejected") {
  auto path = temp_file("bad.ckpt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "XXXXgarbage";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("bad magic"),
                       std::runtime_error);

  NetDescriptor d;
  d.convs = {{2, 2}};
  d.hidden = 4;
  save_checkpoint(init_params(d, 1), path.string());
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size / 2);
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()), doctest::Contains("truncated"),
                       std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS(load_checkpoint(path.string()));
}

TEST_CASE("checkpoint: linear mapper round trip") {
  LinearMapper m;
  m.dim = 6;
  m.weights.resize(6, 7);
  Rng rng{17};
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 7; ++c) m.weights(r, c) = static_cast<float>(rng.uniform(-1.0, 1.0));
  auto path = temp_file("mapper.ckpt");
  save_linear_mapper(m, path.string());
  LinearMapper back = load_linear_mapper(path.string());
  CHECK(back.dim == 6);
  CHECK(back.weights == m.weights);
  std::filesystem::remove(path);
}

TEST_CASE("reward log: CSV round trip is value-exact") {
  RewardLog log = sample_log(23, 200);
  auto path = temp_file("log.csv");
  write_reward_log(log, path.string());
  RewardLog back = read_reward_log(path.string());
  CHECK(back == log);

  // first line is the exact header
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "episode,total_reward,steps,wall_ms,worker_kind");
  std::filesystem::remove(path);
}

TEST_CASE("reward log: header-only file reads as empty") {
  auto path = temp_file("empty.csv");
  write_reward_log(RewardLog{}, path.string());
  RewardLog back = read_reward_log(path.string());
  CHECK(back.episodes.empty());
  std::filesystem::remove(path);
}

TEST_CASE("reward log: non-monotone episode indices are rejected") {
  auto path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "episode,total_reward,steps,wall_ms,worker_kind\n"
        << "1,0.5,10,3,native\n"
        << "3,0.5,10,3,native\n"
        << "2,0.5,10,3,native\n";
  }
  CHECK_THROWS_AS(read_reward_log(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("reward log: wrong header is rejected") {
  auto path = temp_file("hdr.csv");
  {
    std::ofstream out(path);
    out << "episode,reward\n1,0.5\n";
  }
  CHECK_THROWS_AS(read_reward_log(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("reward log: incremental writer matches the batch writer") {
  RewardLog log = sample_log(29, 40);
  auto p1 = temp_file("inc.csv");
  auto p2 = temp_file("batch.csv");
  {
    RewardLogWriter w(p1.string());
    for (const auto& rec : log.episodes) w.append(rec);
  }
  write_reward_log(log, p2.string());
  std::ifstream a(p1), b(p2);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("reward log: kind filter") {
  RewardLog log = sample_log(31, 100);
  RewardLog native = log.filtered(WorkerKind::Native);
  RewardLog mapped = log.filtered(WorkerKind::Mapped);
  CHECK(native.episodes.size() + mapped.episodes.size() == 100);
  for (const auto& e : native.episodes) CHECK(e.kind == WorkerKind::Native);
  for (const auto& e : mapped.episodes) CHECK(e.kind == WorkerKind::Mapped);
}

TEST_CASE("svg plot: deterministic, one polyline and legend entry per log") {
  std::vector<std::pair<std::string, RewardLog>> logs = {
      {"pretrained", sample_log(41, 60)},
      {"scratch", sample_log(43, 60)},
  };
  std::string svg = plot_curves(logs, 10);
  CHECK(svg == plot_curves(logs, 10));
  CHECK(svg.find("<svg") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    ++polylines;
  CHECK(polylines >= 2);
  CHECK(svg.find("pretrained") != std::string::npos);
  CHECK(svg.find("scratch") != std::string::npos);

  CHECK_THROWS_AS(plot_curves({}, 10), std::invalid_argument);
  CHECK_THROWS_AS(plot_curves(logs, 0), std::invalid_argument);
}

TEST_CASE("svg plot: write_plot produces a parsable file") {
  auto path = temp_file("curves.svg");
  write_plot({{"run", sample_log(47, 30)}}, 5, path.string());
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("</svg>") != std::string::npos);
  std::filesystem::remove(path);
}
