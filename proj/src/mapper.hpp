#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "envs.hpp"
#include "frame.hpp"
#include "preprocess.hpp"

namespace cvt {

// Static source->target action table:
// {NoOp, Fire, Right, Left, RightFire, LeftFire} -> {Fire, Fire, Right, Left, Right, Left}.
inline constexpr std::array<int, 6> kActionMap = {1, 1, 2, 3, 2, 3};

int map_action(int a_source);

// Canonical preimage used by pullback-control workers. NoOp has no true
// preimage under the table; it maps to source NoOp.
int inverse_action(int a_target);

// Rewards pass through unscaled.
double map_reward(double r_source);

// Oracle visual mapper: builds the analogous MiniBreakout state from a
// MiniPong state (coordinates transposed, bricks all alive), renders it and
// runs the target-side attention preprocessing.
PreprocessedFrame analytic_map(const GameState& source_state);

// Affine least-squares stand-in for a learned visual mapper. Dimension
// generic so small instances can be checked against a pseudoinverse oracle.
struct LinearMapper {
  int dim = 0;
  Eigen::MatrixXd weights;  // dim x (dim + 1), last column is the bias
  int pair_count = 0;
  double residual_mse = 0.0;

  std::vector<double> apply(const std::vector<double>& input) const;
};

// Minimizes sum ||W [x;1] - y||^2 + lambda ||W||^2 over the pairs.
// Throws std::invalid_argument on empty input / negative lambda and
// std::runtime_error when the normal equations are degenerate (use
// lambda > 0).
LinearMapper fit_linear_mapper(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                               double lambda);

LinearMapper fit_linear_mapper(const std::vector<std::pair<PreprocessedFrame, PreprocessedFrame>>& pairs,
                               double lambda);

enum class MapperKind { Analytic, Linear, Identity };

// What a mapped worker sees from the source game at one step.
struct SourceObservation {
  GameState state;
  PreprocessedFrame preprocessed;
};

struct Mapper {
  MapperKind kind = MapperKind::Analytic;
  LinearMapper linear;  // required for MapperKind::Linear

  // Linear output is clamped to [0,1] so the PreprocessedFrame range
  // invariant always holds. Throws std::logic_error for an unfitted
  // linear mapper.
  PreprocessedFrame apply(const SourceObservation& obs) const;
};

}  // namespace cvt
