#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gain/tensor.h"

namespace gain {

// Parameters keyed by a stable, unique name. Iteration order is the name
// order, which fixes the order of every per-parameter loop.
using ParamStore = std::map<std::string, Tensor>;

struct AdamWConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// AdamW with decoupled weight decay and bias-corrected moments.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  // Applies one update to every parameter that has a gradient. Moment buffers
  // are created on first use and must keep the parameter's size afterwards.
  void Step(ParamStore& params);

  std::int64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<double>* first_moment(const std::string& name) const;
  const std::vector<double>* second_moment(const std::string& name) const;

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };

  AdamWConfig config_;
  std::int64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

void ZeroGrads(ParamStore& params);
std::size_t ParameterCount(const ParamStore& params);

}  // namespace gain
