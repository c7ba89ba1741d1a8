#include "kws/train/lr_schedule.hpp"

#include <algorithm>
#include <cmath>

namespace kws::train {

double PlateauSchedule::update(double dev_loss) {
  // !(x <= y) instead of x > y so NaN lands on the no-improvement side
  const bool no_improvement =
      has_prev && !(dev_loss <= (1.0 - significance) * prev_loss);
  if (no_improvement && epochs_at_lr >= min_dwell) {
    lr = std::max(decay * lr, floor);
    epochs_at_lr = 0;
  } else {
    ++epochs_at_lr;
  }
  if (std::isfinite(dev_loss)) {
    prev_loss = dev_loss;
    has_prev = true;
  }
  return lr;
}

}  // namespace kws::train
