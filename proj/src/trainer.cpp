#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "preprocess.hpp"

namespace cvt {

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int sample_action(const std::vector<double>& policy, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < policy.size(); ++a) {
    acc += policy[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(policy.size()) - 1;
}

EnvKind native_env_kind(const TrainConfig& cfg) {
  return cfg.net.n_actions == 6 ? EnvKind::MiniPong : EnvKind::MiniBreakout;
}

void reset_worker(WorkerRuntime& rt, const WorkerSpec& spec, const TrainConfig& cfg) {
  EnvKind kind = spec.kind == WorkerKind::Native ? native_env_kind(cfg) : EnvKind::MiniPong;
  auto [state, frame] = env_reset(kind, rt.rng.next());
  rt.env = state;
  if (spec.kind == WorkerKind::Native) {
    rt.obs = attention_preprocess(frame, kind);
  } else {
    Mapper m = cfg.mapper;
    m.kind = spec.mapper_kind;
    rt.obs = m.apply({rt.env, attention_preprocess(frame, EnvKind::MiniPong)});
  }
  rt.rec_state = RecurrentState::zero(cfg.net.hidden);
  rt.episode_reward = 0.0;
  rt.episode_steps = 0;
  rt.episode_start_ms = cfg.deterministic ? 0 : now_ms();
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.workers < 1) throw std::invalid_argument("train: workers must be >= 1");
  if (cfg.episode_budget < 1) throw std::invalid_argument("train: episode budget must be >= 1");
  if (cfg.t_max < 1) throw std::invalid_argument("train: t_max must be >= 1");
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw std::invalid_argument("train: gamma out of [0,1]");
}

}  // namespace

std::pair<int, int> split_workers(int total, int ratio_native, int ratio_mapped) {
  if (total < 1) throw std::invalid_argument("split_workers: zero total workers");
  if (ratio_native < 0 || ratio_mapped < 0 || ratio_native + ratio_mapped == 0)
    throw std::invalid_argument("split_workers: bad ratio");
  double frac = static_cast<double>(ratio_native) / (ratio_native + ratio_mapped);
  int native = static_cast<int>(std::floor(total * frac + 0.5));
  if (ratio_native >= 1 && ratio_mapped >= 1) {
    // both sides must stay represented
    if (native < 1) native = 1;
    if (native > total - 1) native = total - 1;
    if (total < 2) throw std::invalid_argument("split_workers: mixed ratio needs >= 2 workers");
  }
  return {native, total - native};
}

int expert_action(const GameState& s) {
  if (s.kind != EnvKind::MiniPong)
    throw std::invalid_argument("expert_action: the scripted expert plays MiniPong");
  if (!s.in_play) return 1;  // serve
  int target = s.ball_y;
  if (s.ball_dx > 0) {
    // Incoming ball: project its arrival row at the paddle column, then stand
    // one cell off-center so the contact deflects the ball away from the
    // opponent's current position.
    int y = s.ball_y, dy = s.ball_dy;
    for (int x = s.ball_x; x < kFrameSize - 1; ++x) {
      int ny = y + dy;
      if (ny < 0 || ny >= kFrameSize) {
        dy = -dy;
        ny = y + dy;
      }
      y = ny;
    }
    target = y - (y >= s.opponent ? 1 : -1);
  }
  if (target > s.paddle) return 2;  // toward +y
  if (target < s.paddle) return 3;  // toward -y
  return 0;                         // in position: hold
}

SegmentResult worker_segment(const ParameterStore& store, const WorkerSpec& spec,
                             WorkerRuntime& rt, const TrainConfig& cfg) {
  SegmentResult out;
  out.params_used = store.snapshot();
  out.trajectory.initial_state = rt.rec_state;

  Mapper mapper = cfg.mapper;
  mapper.kind = spec.mapper_kind;

  bool done = false;
  for (int i = 0; i < cfg.t_max; ++i) {
    out.caches.emplace_back();
    ForwardResult fwd = forward(out.params_used, rt.obs, rt.rec_state, &out.caches.back());

    TrajectoryStep step;
    step.obs = rt.obs;
    step.value = fwd.value;
    step.log_probs.resize(fwd.policy.size());
    for (std::size_t a = 0; a < fwd.policy.size(); ++a)
      step.log_probs[a] = std::log(std::max(fwd.policy[a], 1e-300));

    StepResult sr;
    if (spec.kind == WorkerKind::Native) {
      step.action = sample_action(fwd.policy, rt.rng);
      sr = env_step(rt.env, step.action);
      step.reward = sr.reward;
      rt.obs = attention_preprocess(sr.frame, rt.env.kind);
    } else if (spec.control == ControlMode::Pullback) {
      step.action = sample_action(fwd.policy, rt.rng);
      sr = env_step(rt.env, inverse_action(step.action));
      step.reward = map_reward(sr.reward);
      rt.obs = mapper.apply({rt.env, attention_preprocess(sr.frame, EnvKind::MiniPong)});
    } else {  // expert replay: the scripted source expert acts, its action is forward-mapped
      int a_src = expert_action(rt.env);
      step.action = map_action(a_src);
      sr = env_step(rt.env, a_src);
      step.reward = map_reward(sr.reward);
      rt.obs = mapper.apply({rt.env, attention_preprocess(sr.frame, EnvKind::MiniPong)});
    }

    rt.rec_state = fwd.state;
    rt.episode_reward += step.reward;
    rt.episode_steps += 1;
    out.trajectory.steps.push_back(std::move(step));
    if (sr.done) {
      done = true;
      break;
    }
  }

  out.episode_complete = done;
  out.trajectory.bootstrap_value =
      done ? 0.0 : forward(out.params_used, rt.obs, rt.rec_state).value;
  return out;
}

namespace {

StageResult run_pool(const TrainConfig& cfg, ParameterSet initial) {
  validate_config(cfg);
  auto [n_native, n_mapped] = split_workers(cfg.workers, cfg.ratio_native, cfg.ratio_mapped);

  std::vector<WorkerSpec> specs(cfg.workers);
  for (int i = 0; i < cfg.workers; ++i) {
    specs[i].kind = i < n_native ? WorkerKind::Native : WorkerKind::Mapped;
    specs[i].id = i;
    specs[i].mapper_kind = cfg.mapper.kind;
    specs[i].control = cfg.control;
  }

  ParameterStore store(std::move(initial), cfg.opt);
  std::vector<WorkerRuntime> runtimes(cfg.workers);
  for (int i = 0; i < cfg.workers; ++i) {
    runtimes[i].rng = derive_stream(cfg.seed, static_cast<std::uint64_t>(i));
    reset_worker(runtimes[i], specs[i], cfg);
  }

  RewardLog log;
  std::mutex log_mu;

  // Returns false once the budget is exhausted.
  auto complete_episode = [&](int widx) {
    std::lock_guard<std::mutex> lock(log_mu);
    std::uint64_t idx = store.claim_episode();
    if (idx >= static_cast<std::uint64_t>(cfg.episode_budget)) return false;
    EpisodeRecord rec;
    rec.episode = static_cast<std::int64_t>(idx) + 1;
    rec.total_reward = runtimes[widx].episode_reward;
    rec.steps = runtimes[widx].episode_steps;
    rec.wall_ms = cfg.deterministic ? 0 : now_ms() - runtimes[widx].episode_start_ms;
    rec.kind = specs[widx].kind;
    log.episodes.push_back(rec);
    if (cfg.on_episode) cfg.on_episode(rec);
    if (cfg.checkpoint_every > 0 && rec.episode % cfg.checkpoint_every == 0 && cfg.on_checkpoint)
      cfg.on_checkpoint(store.snapshot(), rec.episode);
    reset_worker(runtimes[widx], specs[widx], cfg);
    if (cfg.stop_after && cfg.stop_after(rec)) return false;
    return idx + 1 < static_cast<std::uint64_t>(cfg.episode_budget);
  };

  auto run_one = [&](int widx) {
    SegmentResult seg = worker_segment(store, specs[widx], runtimes[widx], cfg);
    try {
      LossAndGrads lg = a3c_loss_and_grads(seg.params_used, seg.trajectory, cfg.gamma,
                                           cfg.beta_entropy, cfg.c_value, &seg.caches);
      store.apply_update(lg.grads);
    } catch (const std::runtime_error& e) {
      std::cerr << "warning: dropped segment (" << e.what() << ")\n";
    }
    if (seg.episode_complete) return complete_episode(widx);
    return true;
  };

  if (cfg.deterministic) {
    bool keep_going = true;
    while (keep_going)
      for (int w = 0; w < cfg.workers && keep_going; ++w) keep_going = run_one(w);
  } else {
    std::atomic<bool> stop{false};
    std::vector<std::thread> threads;
    threads.reserve(cfg.workers);
    for (int w = 0; w < cfg.workers; ++w)
      threads.emplace_back([&, w] {
        while (!stop.load(std::memory_order_relaxed))
          if (!run_one(w)) stop.store(true, std::memory_order_relaxed);
      });
    for (auto& t : threads) t.join();
  }

  StageResult out;
  out.params = store.snapshot();
  out.log = std::move(log);
  return out;
}

}  // namespace

StageResult train_stage1(const TrainConfig& config) {
  TrainConfig cfg = config;
  cfg.net.n_actions = 6;
  cfg.ratio_native = 1;
  cfg.ratio_mapped = 0;
  return run_pool(cfg, init_params(cfg.net, cfg.init_seed));
}

StageResult train_stage2(const TrainConfig& config, const ParameterSet* source_params) {
  TrainConfig cfg = config;
  cfg.net.n_actions = 4;
  ParameterSet initial = source_params ? init_transfer_weights(*source_params, cfg.net, cfg.init_seed)
                                       : init_params(cfg.net, cfg.init_seed);
  return run_pool(cfg, std::move(initial));
}

std::vector<double> evaluate_native(const ParameterSet& params, int episodes, std::uint64_t seed) {
  if (params.desc.n_actions != 4)
    throw std::invalid_argument("evaluate_native: expected a 4-action target net");
  Rng rng = derive_stream(seed, 0xe7a1);
  std::vector<double> rewards;
  rewards.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    auto [state, frame] = env_reset(EnvKind::MiniBreakout, rng.next());
    PreprocessedFrame obs = attention_preprocess(frame, EnvKind::MiniBreakout);
    RecurrentState rec = RecurrentState::zero(params.desc.hidden);
    double total = 0.0;
    while (!state.done) {
      ForwardResult fwd = forward(params, obs, rec);
      StepResult sr = env_step(state, sample_action(fwd.policy, rng));
      total += sr.reward;
      obs = attention_preprocess(sr.frame, EnvKind::MiniBreakout);
      rec = fwd.state;
    }
    rewards.push_back(total);
  }
  return rewards;
}

}  // namespace cvt
