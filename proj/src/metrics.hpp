#pragma once

#include <optional>
#include <string>

#include "reward_log.hpp"

namespace cvt {

struct TransferMetrics {
  std::optional<double> jumpstart;                  // absent when <= 0 at the reporting layer
  std::optional<std::int64_t> episodes_to_threshold;
  double total_rewards = 0.0;
  std::optional<double> transfer_ratio;

  double jumpstart_raw = 0.0;  // signed value before the "None" rendering rule
  bool total_rewards_truncated = false;  // log shorter than the requested budget
};

// mean(first K transfer rewards) - mean(first K baseline rewards).
// Throws std::invalid_argument if either log has fewer than K episodes.
double jumpstart(const RewardLog& log_transfer, const RewardLog& log_baseline, int k);

// Smallest 1-based position e >= window with mean(rewards[e-window+1..e])
// >= threshold; nullopt if never reached.
std::optional<std::int64_t> episodes_to_threshold(const RewardLog& log, double threshold,
                                                  int window);

// Discrete area under the running-mean-reward curve over the first `budget`
// episodes. A shorter log is summed over what exists and flagged.
struct TotalRewards {
  double value = 0.0;
  bool truncated = false;
};
TotalRewards total_rewards(const RewardLog& log, int budget);

// total_transfer / total_baseline; absent for a zero baseline.
std::optional<double> transfer_ratio(double total_transfer, double total_baseline);

struct MetricParams {
  double threshold = 12.0;  // half of MiniBreakout's 24-brick maximum
  int window = 10;
  int jumpstart_k = 50;
  int auc_budget = 700;
};

TransferMetrics compute_metrics(const RewardLog& log_transfer, const RewardLog& log_baseline,
                                const MetricParams& params);

// Aligned-text report with the published table's row names, plus a CSV form.
std::string render_metrics_report(const TransferMetrics& m);
std::string render_metrics_csv(const TransferMetrics& m);

}  // namespace cvt
