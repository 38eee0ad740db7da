#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cvt {

enum class WorkerKind { Native, Mapped };

std::string worker_kind_name(WorkerKind kind);
WorkerKind worker_kind_from_name(const std::string& name);

struct EpisodeRecord {
  std::int64_t episode = 0;  // 1-based, strictly increasing
  double total_reward = 0.0;
  int steps = 0;
  std::int64_t wall_ms = 0;
  WorkerKind kind = WorkerKind::Native;

  bool operator==(const EpisodeRecord&) const = default;
};

struct RewardLog {
  std::vector<EpisodeRecord> episodes;

  RewardLog filtered(WorkerKind kind) const;
  std::vector<double> rewards() const;

  bool operator==(const RewardLog&) const = default;
};

// CSV with the exact header `episode,total_reward,steps,wall_ms,worker_kind`.
// Rewards are written at 17 significant digits so round trips are
// value-exact. Reading rejects non-monotone episode indices.
void write_reward_log(const RewardLog& log, const std::string& path);
RewardLog read_reward_log(const std::string& path);

// Incremental writer used while training; one writer per file.
class RewardLogWriter {
 public:
  explicit RewardLogWriter(const std::string& path);
  void append(const EpisodeRecord& rec);

 private:
  std::string path_;
};

std::string format_episode_row(const EpisodeRecord& rec);

}  // namespace cvt
