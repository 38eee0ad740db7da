#include "envs.hpp"

#include <stdexcept>

namespace cvt {

namespace {

int clamp_paddle(int center) {
  if (center < kPaddleHalfWidth) return kPaddleHalfWidth;
  if (center > kFrameSize - 1 - kPaddleHalfWidth) return kFrameSize - 1 - kPaddleHalfWidth;
  return center;
}

bool paddle_covers(int center, int cell) {
  return cell >= center - kPaddleHalfWidth && cell <= center + kPaddleHalfWidth;
}

void serve_pong(GameState& s) {
  s.ball_x = kFrameSize / 2;
  s.ball_y = kFrameSize / 2;
  s.ball_dx = s.rng.sign();
  s.ball_dy = s.rng.sign();
  s.in_play = true;
}

void serve_breakout(GameState& s) {
  s.ball_x = s.paddle;
  s.ball_y = 28;
  s.ball_dx = s.rng.sign();
  s.ball_dy = -1;  // up, toward the bricks
  s.in_play = true;
}

double step_pong(GameState& s, int action) {
  int dir = (action == 2 || action == 4) ? 1 : (action == 3 || action == 5) ? -1 : 0;
  s.paddle = clamp_paddle(s.paddle + dir);

  bool fire = action == 1 || action == 4 || action == 5;
  if (fire && !s.in_play) serve_pong(s);

  double reward = 0.0;
  if (s.in_play) {
    // Scripted opponent: tracks the ball one cell, even step counts only.
    if (s.steps % 2 == 0) {
      int d = (s.ball_y > s.opponent) ? 1 : (s.ball_y < s.opponent) ? -1 : 0;
      s.opponent = clamp_paddle(s.opponent + d);
    }

    int nx = s.ball_x + s.ball_dx;
    int ny = s.ball_y + s.ball_dy;
    if (ny < 0 || ny >= kFrameSize) {
      s.ball_dy = -s.ball_dy;
      ny = s.ball_y + s.ball_dy;
    }
    // Paddle contact reflects the ball; off-center contact deflects it
    // vertically toward the edge that was struck, so paddles can aim.
    auto deflect = [](int center, int contact, int dy) {
      return contact > center ? 1 : contact < center ? -1 : dy;
    };
    if (nx == kFrameSize - 1 && paddle_covers(s.paddle, ny)) {
      s.ball_dx = -1;
      s.ball_dy = deflect(s.paddle, ny, s.ball_dy);
      nx = kFrameSize - 2;
    } else if (nx == 0 && paddle_covers(s.opponent, ny)) {
      s.ball_dx = 1;
      s.ball_dy = deflect(s.opponent, ny, s.ball_dy);
      nx = 1;
    }
    if (nx >= kFrameSize) {  // past the agent: opponent scores
      s.score -= 1;
      reward = -1.0;
      s.in_play = false;
    } else if (nx < 0) {  // past the opponent: agent scores
      s.score += 1;
      reward = 1.0;
      s.in_play = false;
    } else {
      s.ball_x = nx;
      s.ball_y = ny;
    }
  }
  return reward;
}

double step_breakout(GameState& s, int action) {
  int dir = (action == 2) ? 1 : (action == 3) ? -1 : 0;
  s.paddle = clamp_paddle(s.paddle + dir);

  if (action == 1 && !s.in_play) serve_breakout(s);

  double reward = 0.0;
  if (s.in_play) {
    int nx = s.ball_x + s.ball_dx;
    int ny = s.ball_y + s.ball_dy;
    if (nx < 0 || nx >= kFrameSize) {
      s.ball_dx = -s.ball_dx;
      nx = s.ball_x + s.ball_dx;
    }
    if (ny < 0) {
      s.ball_dy = 1;
      ny = s.ball_y + s.ball_dy;
    }
    if (ny == kFrameSize - 1 && paddle_covers(s.paddle, nx)) {
      s.ball_dy = -1;
      ny = kFrameSize - 2;
    }
    if (ny >= kFrameSize) {  // past the bottom: lose a life, no reward
      s.lives -= 1;
      s.in_play = false;
    } else {
      s.ball_x = nx;
      s.ball_y = ny;
      int row = ny - kBrickRowStart;
      if (row >= 0 && row < kBrickRows) {
        int col = nx / kBrickWidth;
        if (s.bricks[row * kBricksPerRow + col]) {
          s.bricks[row * kBricksPerRow + col] = false;
          s.ball_dy = -s.ball_dy;
          s.score += 1;
          reward = 1.0;
        }
      }
    }
  }
  return reward;
}

}  // namespace

std::pair<GameState, Frame> env_reset(EnvKind kind, std::uint64_t seed) {
  GameState s;
  s.kind = kind;
  s.rng = Rng(seed);
  if (kind == EnvKind::MiniBreakout) {
    s.lives = kBreakoutLives;
    s.bricks.fill(true);
  }
  return {s, render(s)};
}

StepResult env_step(GameState& state, int action) {
  if (state.done) throw std::logic_error("env_step: episode is done, reset required");
  if (action < 0 || action >= action_count(state.kind))
    throw std::out_of_range("env_step: action out of range");

  double reward = state.kind == EnvKind::MiniPong ? step_pong(state, action)
                                                  : step_breakout(state, action);
  state.steps += 1;

  if (state.kind == EnvKind::MiniPong) {
    state.done = state.score >= kPongWinScore || state.score <= -kPongWinScore;
  } else {
    state.done = state.lives == 0 || state.bricks_alive() == 0;
  }
  if (state.steps >= kMaxEpisodeSteps) state.done = true;

  StepResult out;
  out.frame = render(state);
  out.reward = reward;
  out.done = state.done;
  out.info = {state.steps, state.score};
  return out;
}

Frame render(const GameState& state) {
  Frame f;
  f.pixels.fill(kBackgroundPixel);
  if (state.kind == EnvKind::MiniPong) {
    for (int y = state.opponent - kPaddleHalfWidth; y <= state.opponent + kPaddleHalfWidth; ++y)
      f.at(0, y) = kPaddlePixel;
    for (int y = state.paddle - kPaddleHalfWidth; y <= state.paddle + kPaddleHalfWidth; ++y)
      f.at(kFrameSize - 1, y) = kPaddlePixel;
  } else {
    for (int row = 0; row < kBrickRows; ++row)
      for (int col = 0; col < kBricksPerRow; ++col)
        if (state.bricks[row * kBricksPerRow + col])
          for (int i = 0; i < kBrickWidth; ++i)
            f.at(col * kBrickWidth + i, kBrickRowStart + row) = kBrickPixel;
    for (int x = state.paddle - kPaddleHalfWidth; x <= state.paddle + kPaddleHalfWidth; ++x)
      f.at(x, kFrameSize - 1) = kPaddlePixel;
  }
  if (state.in_play) f.at(state.ball_x, state.ball_y) = kBallPixel;
  return f;
}

}  // namespace cvt
