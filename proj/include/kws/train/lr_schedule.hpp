#pragma once

namespace kws::train {

// Loss-plateau schedule: after each epoch's dev evaluation, if the loss did
// not drop by at least 5% versus the previous epoch and the current rate has
// been held for >= 2 epochs, the rate decays to 60%, floored at 1e-5.
struct PlateauSchedule {
  double lr = 1e-3;
  double floor = 1e-5;
  double decay = 0.6;
  double significance = 0.05;
  int min_dwell = 2;

  double prev_loss = 0.0;
  bool has_prev = false;
  int epochs_at_lr = 0;

  // Call once per epoch. A non-finite dev loss counts as no improvement and
  // does not overwrite the comparison baseline.
  double update(double dev_loss);
};

}  // namespace kws::train
