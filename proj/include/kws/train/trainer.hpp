#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kws/data/batcher.hpp"
#include "kws/model/model.hpp"
#include "kws/train/adam.hpp"
#include "kws/train/lr_schedule.hpp"

namespace kws::train {

struct TrainConfig {
  int epochs = 80;
  int batch_size = 100;
  double initial_lr = 1e-3;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch;
  double train_loss, train_acc;
  double dev_loss, dev_acc;
  double lr;
};

struct FitResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;     // -1 when no epoch ran
  double best_dev_acc = 0.0;
  double best_dev_loss = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

// Dev loss/accuracy in inference mode.
std::pair<double, double> evaluate_split(model::Model& model,
                                         const std::vector<data::Entry>& split,
                                         data::FeatureSource& source,
                                         int batch_size);

// Mini-batch training with Adam and the plateau schedule. Each epoch
// evaluates the dev split, feeds the scheduler, and tracks the best model by
// dev accuracy (ties broken by lower dev loss). On return the model holds
// the best-epoch weights; a diverged run aborts on the last good snapshot.
// dev_source must serve clean (non-augmented) features.
FitResult fit(model::Model& model, const std::vector<data::Entry>& train_split,
              const std::vector<data::Entry>& dev_split,
              data::FeatureSource& train_source,
              data::FeatureSource& dev_source, const TrainConfig& config,
              std::ostream* log = nullptr);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

}  // namespace kws::train
