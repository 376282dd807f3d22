#include "fusionloc/optim.hpp"

#include <cmath>

#include "fusionloc/errors.hpp"

namespace fusionloc::ad {

void Adam::step(ParameterStore& params) {
  const auto& all = params.all();
  if (m_.empty()) {
    m_.resize(all.size());
    v_.resize(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      m_[i].assign(all[i].value.numel(), 0.0);
      v_[i].assign(all[i].value.numel(), 0.0);
    }
  }
  if (m_.size() != all.size()) {
    throw InvalidInputError("adam: parameter count changed mid-run");
  }

  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));

  for (std::size_t i = 0; i < all.size(); ++i) {
    Tensor t = all[i].value;
    auto theta = t.mutable_values();
    auto g = t.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      theta[j] -= config_.lr * config_.weight_decay * theta[j];
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      theta[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
    t.zero_grad();
  }
}

void Adam::restore(std::uint64_t step_count, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  step_count_ = step_count;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace fusionloc::ad
