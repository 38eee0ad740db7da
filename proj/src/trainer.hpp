#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "envs.hpp"
#include "mapper.hpp"
#include "param_store.hpp"
#include "policy_net.hpp"
#include "reward_log.hpp"

namespace cvt {

enum class ControlMode { Pullback, ExpertReplay };

struct WorkerSpec {
  WorkerKind kind = WorkerKind::Native;
  int id = 0;
  std::uint64_t env_seed = 0;
  MapperKind mapper_kind = MapperKind::Analytic;  // Mapped only
  ControlMode control = ControlMode::Pullback;    // Mapped only
};

// For ratio a:b over w workers: native = round(w*a/(a+b)), mapped = w - native.
std::pair<int, int> split_workers(int total, int ratio_native, int ratio_mapped);

struct TrainConfig {
  int workers = 4;
  int ratio_native = 1;
  int ratio_mapped = 0;
  std::uint64_t seed = 0;
  int episode_budget = 1;
  bool deterministic = true;
  double gamma = 0.99;
  int t_max = 5;
  double beta_entropy = 0.01;
  double c_value = 0.5;
  RmsPropConfig opt;
  NetDescriptor net;  // n_actions fixed per stage by the train_stage* entry points
  Mapper mapper;
  ControlMode control = ControlMode::Pullback;
  std::uint64_t init_seed = 1;  // weight init / head re-init stream

  // Optional hooks, invoked from the orchestration thread only.
  std::function<void(const EpisodeRecord&)> on_episode;
  std::function<void(const ParameterSet&, std::int64_t episode)> on_checkpoint;
  int checkpoint_every = 0;  // episodes; 0 disables
  // Returning true ends training after the given episode, before the budget
  // is exhausted (e.g. once a reward threshold is crossed).
  std::function<bool(const EpisodeRecord&)> stop_after;
};

// Per-worker mutable state across segments.
struct WorkerRuntime {
  GameState env;
  PreprocessedFrame obs;
  RecurrentState rec_state;
  Rng rng;
  double episode_reward = 0.0;
  int episode_steps = 0;
  std::int64_t episode_start_ms = 0;
};

struct SegmentResult {
  Trajectory trajectory;
  std::vector<ForwardCache> caches;  // per-step forward caches for the update
  bool episode_complete = false;
  ParameterSet params_used;  // the snapshot the segment acted with
};

// Snapshots the store, rolls out up to t_max steps. Native workers drive the
// target game on preprocessed native frames. Mapped pullback workers observe
// mapped source frames and pull sampled target actions back into MiniPong.
// Mapped expert-replay workers let the scripted source expert act and store
// the forward-mapped action. Trajectories record target-action indices in all
// modes of stage 2 (source-action indices in stage 1).
SegmentResult worker_segment(const ParameterStore& store, const WorkerSpec& spec,
                             WorkerRuntime& rt, const TrainConfig& cfg);

// The scripted MiniPong expert: move the paddle toward the ball's y, fire when
// aligned. Shadowing the ball is perfect play (the gap never exceeds the
// paddle half-width once closed), so this stands in for a converged source
// policy the way the analytic mapper stands in for a learned one.
int expert_action(const GameState& source_state);

struct StageResult {
  ParameterSet params;
  RewardLog log;
};

// Stage 1: train a 6-action net on MiniPong with all-native workers.
StageResult train_stage1(const TrainConfig& config);

// Stage 2: fine-tune a 4-action net on MiniBreakout with a mixed pool.
// source_params == nullptr gives the scratch baseline (fresh init). The
// returned log merges all workers; native target-game episodes carry
// WorkerKind::Native.
StageResult train_stage2(const TrainConfig& config, const ParameterSet* source_params);

// Runs `episodes` greedy-sampled native episodes on MiniBreakout with frozen
// parameters; returns per-episode total rewards.
std::vector<double> evaluate_native(const ParameterSet& params, int episodes, std::uint64_t seed);

}  // namespace cvt
