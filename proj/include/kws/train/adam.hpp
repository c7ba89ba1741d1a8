#pragma once

#include <vector>

#include "kws/autodiff/tape.hpp"

namespace kws::train {

// Adam with bias correction: theta -= lr * m_hat / (sqrt(v_hat) + eps).
class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double lr = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long steps() const { return t_; }

  // One update from the accumulated grads. A non-finite gradient aborts the
  // step with the parameter name and batch id in the message.
  void step(long batch_id);
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace kws::train
