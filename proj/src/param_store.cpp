#include "param_store.hpp"

#include <cmath>
#include <iostream>

namespace cvt {

ParameterStore::ParameterStore(ParameterSet initial, RmsPropConfig opt)
    : desc_(initial.desc), opt_(opt) {
  for (auto& [name, tensor] : initial.tensors) {
    auto slot = std::make_unique<Slot>();
    slot->name = name;
    slot->ms = Tensor(tensor.shape);
    slot->value = std::move(tensor);
    slots_.push_back(std::move(slot));
  }
}

ParameterSet ParameterStore::snapshot() const {
  ParameterSet p;
  p.desc = desc_;
  p.tensors.reserve(slots_.size());
  for (const auto& slot : slots_) {
    std::lock_guard<std::mutex> lock(slot->mu);
    p.tensors.emplace_back(slot->name, slot->value);
  }
  return p;
}

std::uint64_t ParameterStore::apply_update(const ParameterSet& grads) {
  if (!all_finite(grads)) {
    std::cerr << "warning: dropping non-finite gradient update\n";
    return updates_.load();
  }
  for (const auto& slot : slots_) {
    const Tensor& g = grads.at(slot->name);
    std::lock_guard<std::mutex> lock(slot->mu);
    std::size_t n = g.data.size();
    const double* gv = g.data.data();
    double* ms = slot->ms.data.data();
    double* value = slot->value.data.data();
    for (std::size_t i = 0; i < n; ++i) {
      ms[i] = opt_.decay * ms[i] + (1.0 - opt_.decay) * gv[i] * gv[i];
      value[i] -= opt_.lr * gv[i] / (std::sqrt(ms[i]) + opt_.eps);
    }
  }
  return updates_.fetch_add(1) + 1;
}

}  // namespace cvt
