#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "frame.hpp"
#include "rng.hpp"

namespace cvt {

enum class EnvKind { MiniPong, MiniBreakout };

inline int action_count(EnvKind kind) { return kind == EnvKind::MiniPong ? 6 : 4; }

// MiniPong actions: 0 NoOp, 1 Fire, 2 Right, 3 Left, 4 Right+Fire, 5 Left+Fire.
// MiniBreakout actions: 0 NoOp, 1 Fire, 2 Right, 3 Left.
// "Right" moves the paddle toward the increasing axis (y for MiniPong, x for
// MiniBreakout), one cell per step, clamped at the walls.

inline constexpr int kPaddleHalfWidth = 2;  // paddle spans 5 cells
inline constexpr int kMaxEpisodeSteps = 1000;
inline constexpr int kBrickRows = 3;        // rows y in {2,3,4}
inline constexpr int kBricksPerRow = 8;     // width-4 bricks
inline constexpr int kBrickRowStart = 2;
inline constexpr int kBrickWidth = 4;
inline constexpr int kPongWinScore = 5;
inline constexpr int kBreakoutLives = 3;

struct GameState {
  EnvKind kind = EnvKind::MiniPong;
  int ball_x = kFrameSize / 2;
  int ball_y = kFrameSize / 2;
  int ball_dx = 1;
  int ball_dy = 1;
  int paddle = kFrameSize / 2;    // agent paddle center: y (pong) / x (breakout)
  int opponent = kFrameSize / 2;  // MiniPong only
  std::array<bool, kBrickRows * kBricksPerRow> bricks{};  // MiniBreakout only
  int score = 0;
  int lives = 0;
  int steps = 0;
  bool in_play = false;
  bool done = false;
  Rng rng;

  bool operator==(const GameState&) const = default;

  bool brick_alive(int row, int col) const { return bricks[row * kBricksPerRow + col]; }
  int bricks_alive() const {
    int n = 0;
    for (bool b : bricks) n += b ? 1 : 0;
    return n;
  }
};

struct StepInfo {
  int steps = 0;
  int score = 0;
};

struct StepResult {
  Frame frame;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Canonical start state plus its rendering. Identical seeds give
// bitwise-identical states.
std::pair<GameState, Frame> env_reset(EnvKind kind, std::uint64_t seed);

// One physics tick. Throws std::out_of_range on a bad action and
// std::logic_error when stepping a finished episode.
StepResult env_step(GameState& state, int action);

// Pure function of the state; palette invariants of Frame hold.
Frame render(const GameState& state);

}  // namespace cvt
