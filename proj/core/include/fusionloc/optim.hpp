#pragma once

#include <cstdint>
#include <vector>

#include "fusionloc/autodiff.hpp"

namespace fusionloc::ad {

struct AdamConfig {
  double lr = 1e-4;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with decoupled weight decay: theta <- theta - lr*wd*theta is applied
// before the moment update, then the standard bias-corrected step. Gradients
// are zeroed after each step.
class Adam {
 public:
  explicit Adam(const AdamConfig& config) : config_(config) {}

  void step(ParameterStore& params);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::uint64_t step_count() const { return step_count_; }

  // Moment vectors in parameter-store order, for checkpointing.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void restore(std::uint64_t step_count, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  AdamConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace fusionloc::ad
