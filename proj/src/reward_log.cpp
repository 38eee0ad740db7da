#include "reward_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvt {

namespace {
constexpr const char* kHeader = "episode,total_reward,steps,wall_ms,worker_kind";
}

std::string worker_kind_name(WorkerKind kind) {
  return kind == WorkerKind::Native ? "native" : "mapped";
}

WorkerKind worker_kind_from_name(const std::string& name) {
  if (name == "native") return WorkerKind::Native;
  if (name == "mapped") return WorkerKind::Mapped;
  throw std::runtime_error("unknown worker kind: " + name);
}

RewardLog RewardLog::filtered(WorkerKind kind) const {
  RewardLog out;
  for (const auto& e : episodes)
    if (e.kind == kind) out.episodes.push_back(e);
  return out;
}

std::vector<double> RewardLog::rewards() const {
  std::vector<double> r;
  r.reserve(episodes.size());
  for (const auto& e : episodes) r.push_back(e.total_reward);
  return r;
}

std::string format_episode_row(const EpisodeRecord& rec) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%lld,%.17g,%d,%lld,%s", static_cast<long long>(rec.episode),
                rec.total_reward, rec.steps, static_cast<long long>(rec.wall_ms),
                worker_kind_name(rec.kind).c_str());
  return buf;
}

void write_reward_log(const RewardLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kHeader << "\n";
  for (const auto& e : log.episodes) out << format_episode_row(e) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

RewardLog read_reward_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty reward log file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw std::runtime_error("reward log header mismatch in " + path);

  RewardLog log;
  std::int64_t prev = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    EpisodeRecord rec;
    try {
      std::getline(row, field, ',');
      rec.episode = std::stoll(field);
      std::getline(row, field, ',');
      rec.total_reward = std::stod(field);
      std::getline(row, field, ',');
      rec.steps = std::stoi(field);
      std::getline(row, field, ',');
      rec.wall_ms = std::stoll(field);
      if (!std::getline(row, field, ',')) throw std::runtime_error("short row");
      rec.kind = worker_kind_from_name(field);
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed reward log row '" + line + "': " + e.what());
    }
    if (rec.episode <= prev)
      throw std::runtime_error("non-monotone episode index in " + path);
    prev = rec.episode;
    log.episodes.push_back(rec);
  }
  return log;
}

RewardLogWriter::RewardLogWriter(const std::string& path) : path_(path) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path_);
  out << kHeader << "\n";
}

void RewardLogWriter::append(const EpisodeRecord& rec) {
  std::ofstream out(path_, std::ios::app);
  out << format_episode_row(rec) << "\n";
}

}  // namespace cvt
