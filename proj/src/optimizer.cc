#include "gain/optimizer.h"

#include <cmath>

#include "gain/errors.h"

namespace gain {

void AdamW::Step(ParamStore& params) {
  ++step_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (auto& [name, param] : params) {
    if (!param.requires_grad() || !param.has_grad()) continue;
    Moments& mom = moments_[name];
    if (mom.m.empty()) {
      mom.m.assign(param.size(), 0.0);
      mom.v.assign(param.size(), 0.0);
    } else if (mom.m.size() != param.size()) {
      throw DimensionError("adamw: moment buffer for '" + name + "' does not match parameter size");
    }
    auto w = param.mutable_data();
    auto g = param.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      mom.m[i] = config_.beta1 * mom.m[i] + (1.0 - config_.beta1) * g[i];
      mom.v[i] = config_.beta2 * mom.v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = mom.m[i] / bias1;
      const double v_hat = mom.v[i] / bias2;
      w[i] -= config_.learning_rate * config_.weight_decay * w[i];
      w[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

const std::vector<double>* AdamW::first_moment(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second.m;
}

const std::vector<double>* AdamW::second_moment(const std::string& name) const {
  auto it = moments_.find(name);
  return it == moments_.end() ? nullptr : &it->second.v;
}

void ZeroGrads(ParamStore& params) {
  for (auto& [name, param] : params) param.ZeroGrad();
}

std::size_t ParameterCount(const ParamStore& params) {
  std::size_t total = 0;
  for (const auto& [name, param] : params) total += param.size();
  return total;
}

}  // namespace gain
