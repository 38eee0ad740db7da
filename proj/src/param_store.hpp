#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "policy_net.hpp"

namespace cvt {

struct RmsPropConfig {
  double lr = 7e-4;
  double decay = 0.99;
  double eps = 0.1;
};

// Shared model state for the asynchronous workers. Each named tensor has its
// own lock: snapshot reads and updates are atomic per tensor, while
// cross-tensor staleness is allowed (Hogwild-style contract).
class ParameterStore {
 public:
  ParameterStore(ParameterSet initial, RmsPropConfig opt);

  ParameterSet snapshot() const;

  // One RMSProp step per named tensor. Grads containing non-finite entries
  // are dropped with a warning and do not advance the update counter.
  // Returns the update counter after the call.
  std::uint64_t apply_update(const ParameterSet& grads);

  std::uint64_t update_count() const { return updates_.load(); }

  // Claims the next global episode slot; returns the 0-based index.
  std::uint64_t claim_episode() { return episodes_.fetch_add(1); }
  std::uint64_t episodes_claimed() const { return episodes_.load(); }

  const NetDescriptor& descriptor() const { return desc_; }

 private:
  struct Slot {
    std::string name;
    Tensor value;
    Tensor ms;  // RMSProp second-moment accumulator
    mutable std::mutex mu;
  };

  NetDescriptor desc_;
  std::vector<std::unique_ptr<Slot>> slots_;
  RmsPropConfig opt_;
  std::atomic<std::uint64_t> updates_{0};
  std::atomic<std::uint64_t> episodes_{0};
};

}  // namespace cvt
