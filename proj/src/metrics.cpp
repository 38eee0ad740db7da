#include "metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cvt {

double jumpstart(const RewardLog& log_transfer, const RewardLog& log_baseline, int k) {
  if (k < 1) throw std::invalid_argument("jumpstart: K must be >= 1");
  if (static_cast<int>(log_transfer.episodes.size()) < k ||
      static_cast<int>(log_baseline.episodes.size()) < k)
    throw std::invalid_argument("jumpstart: logs have fewer than K episodes");
  double st = 0.0, sb = 0.0;
  for (int i = 0; i < k; ++i) {
    st += log_transfer.episodes[i].total_reward;
    sb += log_baseline.episodes[i].total_reward;
  }
  return (st - sb) / k;
}

std::optional<std::int64_t> episodes_to_threshold(const RewardLog& log, double threshold,
                                                  int window) {
  if (window < 1) throw std::invalid_argument("episodes_to_threshold: window must be >= 1");
  const auto& eps = log.episodes;
  double acc = 0.0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    acc += eps[e].total_reward;
    if (e >= static_cast<std::size_t>(window)) acc -= eps[e - window].total_reward;
    if (e + 1 >= static_cast<std::size_t>(window) && acc / window >= threshold)
      return static_cast<std::int64_t>(e) + 1;
  }
  return std::nullopt;
}

TotalRewards total_rewards(const RewardLog& log, int budget) {
  if (log.episodes.empty()) throw std::invalid_argument("total_rewards: empty log");
  if (budget < 1) throw std::invalid_argument("total_rewards: budget must be >= 1");
  TotalRewards out;
  int n = static_cast<int>(log.episodes.size());
  if (n < budget) {
    out.truncated = true;
    budget = n;
  }
  double sum = 0.0;
  for (int e = 0; e < budget; ++e) {
    sum += log.episodes[e].total_reward;
    out.value += sum / (e + 1);  // running mean up to episode e+1
  }
  return out;
}

std::optional<double> transfer_ratio(double total_transfer, double total_baseline) {
  if (total_baseline == 0.0) return std::nullopt;
  return total_transfer / total_baseline;
}

TransferMetrics compute_metrics(const RewardLog& log_transfer, const RewardLog& log_baseline,
                                const MetricParams& params) {
  TransferMetrics m;
  m.jumpstart_raw = jumpstart(log_transfer, log_baseline, params.jumpstart_k);
  if (m.jumpstart_raw > 0.0) m.jumpstart = m.jumpstart_raw;  // "None" below zero improvement
  m.episodes_to_threshold = episodes_to_threshold(log_transfer, params.threshold, params.window);
  TotalRewards t = total_rewards(log_transfer, params.auc_budget);
  TotalRewards b = total_rewards(log_baseline, params.auc_budget);
  m.total_rewards = t.value;
  m.total_rewards_truncated = t.truncated || b.truncated;
  m.transfer_ratio = transfer_ratio(t.value, b.value);
  return m;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string render_metrics_report(const TransferMetrics& m) {
  std::ostringstream os;
  os << "Jumpstart           " << (m.jumpstart ? num(*m.jumpstart) : "None") << "\n";
  os << "Epoch to threshold  "
     << (m.episodes_to_threshold ? std::to_string(*m.episodes_to_threshold) : "None") << "\n";
  os << "Total Rewards       " << num(m.total_rewards)
     << (m.total_rewards_truncated ? " (short log)" : "") << "\n";
  os << "Transfer Ratio      " << (m.transfer_ratio ? num(*m.transfer_ratio) : "None") << "\n";
  return os.str();
}

std::string render_metrics_csv(const TransferMetrics& m) {
  std::ostringstream os;
  os << "metric,value\n";
  os << "jumpstart," << (m.jumpstart ? num(*m.jumpstart) : "None") << "\n";
  os << "episodes_to_threshold,"
     << (m.episodes_to_threshold ? std::to_string(*m.episodes_to_threshold) : "None") << "\n";
  os << "total_rewards," << num(m.total_rewards) << "\n";
  os << "transfer_ratio," << (m.transfer_ratio ? num(*m.transfer_ratio) : "None") << "\n";
  return os.str();
}

}  // namespace cvt
