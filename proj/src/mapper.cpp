#include "mapper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvt {

int map_action(int a_source) {
  if (a_source < 0 || a_source >= 6) throw std::out_of_range("map_action: source action out of range");
  return kActionMap[a_source];
}

int inverse_action(int a_target) {
  if (a_target < 0 || a_target >= 4) throw std::out_of_range("inverse_action: target action out of range");
  return a_target;  // {0,1,2,3} are their own source-side representatives
}

double map_reward(double r_source) { return r_source; }

PreprocessedFrame analytic_map(const GameState& source_state) {
  GameState t;
  t.kind = EnvKind::MiniBreakout;
  t.paddle = source_state.paddle;
  t.ball_x = source_state.ball_y;
  t.ball_y = source_state.ball_x;
  t.in_play = source_state.in_play;
  t.lives = kBreakoutLives;
  t.bricks.fill(true);  // MiniPong has no brick-state analogue
  return attention_preprocess(render(t), EnvKind::MiniBreakout);
}

std::vector<double> LinearMapper::apply(const std::vector<double>& input) const {
  if (static_cast<int>(input.size()) != dim)
    throw std::invalid_argument("LinearMapper::apply: dimension mismatch");
  Eigen::VectorXd x(dim + 1);
  for (int i = 0; i < dim; ++i) x[i] = input[i];
  x[dim] = 1.0;
  Eigen::VectorXd y = weights * x;
  return {y.data(), y.data() + y.size()};
}

LinearMapper fit_linear_mapper(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs, double lambda) {
  if (pairs.empty()) throw std::invalid_argument("fit_linear_mapper: no pairs");
  if (lambda < 0.0) throw std::invalid_argument("fit_linear_mapper: lambda must be >= 0");

  const int d = static_cast<int>(pairs[0].first.size());
  const int n = static_cast<int>(pairs.size());
  for (const auto& [x, y] : pairs)
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
      throw std::invalid_argument("fit_linear_mapper: inconsistent pair dimensions");

  // Normal equations on the (d+1)-dim augmented inputs:
  // W = Y X^T (X X^T + lambda I)^-1.
  Eigen::MatrixXd X(d + 1, n), Y(d, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) {
      X(i, j) = pairs[j].first[i];
      Y(i, j) = pairs[j].second[i];
    }
    X(d, j) = 1.0;
  }
  LinearMapper m;
  m.dim = d;
  if (n < d + 1) {
    // dual form, n x n system: W = Y (X^T X + lambda I)^-1 X^T
    Eigen::MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::MatrixXd alpha = ldlt.solve(Y.transpose());  // n x d
    if (ldlt.info() != Eigen::Success || !alpha.allFinite())
      throw std::runtime_error("fit_linear_mapper: degenerate normal equations, use lambda > 0");
    m.weights = (X * alpha).transpose();
  } else {
    Eigen::MatrixXd gram = X * X.transpose();
    gram.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::MatrixXd Wt = ldlt.solve(X * Y.transpose());  // (d+1) x d
    if (ldlt.info() != Eigen::Success || !Wt.allFinite())
      throw std::runtime_error("fit_linear_mapper: degenerate normal equations, use lambda > 0");
    m.weights = Wt.transpose();
  }
  m.pair_count = n;
  m.residual_mse = (m.weights * X - Y).squaredNorm() / (static_cast<double>(n) * d);
  return m;
}

LinearMapper fit_linear_mapper(
    const std::vector<std::pair<PreprocessedFrame, PreprocessedFrame>>& pairs, double lambda) {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> flat;
  flat.reserve(pairs.size());
  for (const auto& [src, tgt] : pairs)
    flat.emplace_back(std::vector<double>(src.values.begin(), src.values.end()),
                      std::vector<double>(tgt.values.begin(), tgt.values.end()));
  return fit_linear_mapper(flat, lambda);
}

PreprocessedFrame Mapper::apply(const SourceObservation& obs) const {
  switch (kind) {
    case MapperKind::Analytic:
      return analytic_map(obs.state);
    case MapperKind::Identity:
      return obs.preprocessed;
    case MapperKind::Linear: {
      if (linear.dim != 3 * kFramePixels)
        throw std::logic_error("Mapper::apply: linear mapper is not fitted for frames");
      std::vector<double> out =
          linear.apply({obs.preprocessed.values.begin(), obs.preprocessed.values.end()});
      PreprocessedFrame f;
      for (int i = 0; i < 3 * kFramePixels; ++i) f.values[i] = std::clamp(out[i], 0.0, 1.0);
      return f;
    }
  }
  throw std::logic_error("Mapper::apply: unknown kind");
}

}  // namespace cvt
