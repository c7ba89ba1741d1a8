#include "kws/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "kws/nn/layers.hpp"
#include "kws/util/errors.hpp"

namespace kws::train {

namespace {

int argmax_row(const Tensor& m, int row) {
  int best = 0;
  for (int j = 1; j < m.dim(1); ++j)
    if (m.at(row, j) > m.at(row, best)) best = j;
  return best;
}

struct Snapshot {
  std::vector<Tensor> values;

  static Snapshot take(model::Model& model) {
    Snapshot s;
    for (Parameter* p : model.parameters()) s.values.push_back(p->value);
    for (auto& [name, buf] : model.buffers()) s.values.push_back(*buf);
    return s;
  }

  void restore(model::Model& model) const {
    size_t i = 0;
    for (Parameter* p : model.parameters()) p->value = values[i++];
    for (auto& [name, buf] : model.buffers()) *buf = values[i++];
  }
};

}  // namespace

std::pair<double, double> evaluate_split(model::Model& model,
                                         const std::vector<data::Entry>& split,
                                         data::FeatureSource& source,
                                         int batch_size) {
  data::BatchStream stream(split, source, batch_size, /*seed=*/0,
                           /*shuffle=*/false);
  stream.start_epoch(0);
  Tensor x;
  std::vector<int> labels;
  double loss_sum = 0.0;
  long correct = 0, seen = 0;
  while (stream.next(x, labels)) {
    Tape tape;
    const Tape::NodeId logits =
        model.forward(tape, tape.constant(x), nn::Mode::kInfer);
    const Tape::NodeId loss = nn::softmax_cross_entropy(tape, logits, labels);
    const int b = static_cast<int>(labels.size());
    loss_sum += tape.value(loss)[0] * b;
    for (int i = 0; i < b; ++i)
      correct += argmax_row(tape.value(logits), i) == labels[size_t(i)];
    seen += b;
  }
  return {loss_sum / double(seen), double(correct) / double(seen)};
}

FitResult fit(model::Model& model, const std::vector<data::Entry>& train_split,
              const std::vector<data::Entry>& dev_split,
              data::FeatureSource& train_source,
              data::FeatureSource& dev_source, const TrainConfig& config,
              std::ostream* log) {
  FitResult result;
  if (config.epochs == 0) return result;

  data::BatchStream stream(train_split, train_source, config.batch_size,
                           config.seed, /*shuffle=*/true);
  Adam opt(model.parameters(), config.initial_lr);
  PlateauSchedule sched;
  sched.lr = config.initial_lr;

  Snapshot best;
  bool have_best = false;
  long batch_id = 0;

  auto abort_run = [&](const std::string& reason) {
    result.aborted = true;
    result.abort_reason = reason;
    if (have_best) best.restore(model);
    if (log) *log << "training aborted: " << reason << "\n";
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double epoch_lr = sched.lr;
    opt.set_lr(epoch_lr);
    stream.start_epoch(epoch);

    Tensor x;
    std::vector<int> labels;
    double loss_sum = 0.0;
    long correct = 0, seen = 0;
    while (stream.next(x, labels)) {
      Tape tape;
      const Tape::NodeId logits =
          model.forward(tape, tape.constant(x), nn::Mode::kTrain);
      const Tape::NodeId loss = nn::softmax_cross_entropy(tape, logits, labels);
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        abort_run("non-finite training loss at batch " +
                  std::to_string(batch_id));
        return result;
      }
      model.zero_grad();
      tape.backward(loss);
      try {
        opt.step(batch_id);
      } catch (const NumericsError& e) {
        abort_run(e.what());
        return result;
      }
      ++batch_id;

      const int b = static_cast<int>(labels.size());
      loss_sum += loss_value * b;
      for (int i = 0; i < b; ++i)
        correct += argmax_row(tape.value(logits), i) == labels[size_t(i)];
      seen += b;
    }

    const auto [dev_loss, dev_acc] =
        evaluate_split(model, dev_split, dev_source, config.batch_size);

    EpochStats stats{epoch, loss_sum / double(seen),
                     double(correct) / double(seen), dev_loss, dev_acc,
                     epoch_lr};
    result.history.push_back(stats);
    if (log) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "epoch %3d  train_loss %.4f acc %.4f  dev_loss %.4f acc "
                    "%.4f  lr %.2e",
                    epoch, stats.train_loss, stats.train_acc, dev_loss,
                    dev_acc, epoch_lr);
      *log << line << "\n";
    }

    const bool better =
        !have_best || dev_acc > result.best_dev_acc ||
        (dev_acc == result.best_dev_acc && dev_loss < result.best_dev_loss);
    if (better) {
      best = Snapshot::take(model);
      have_best = true;
      result.best_epoch = epoch;
      result.best_dev_acc = dev_acc;
      result.best_dev_loss = dev_loss;
    }

    sched.update(dev_loss);
  }

  if (have_best) best.restore(model);
  return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write history CSV: " + path);
  out << "epoch,train_loss,train_acc,dev_loss,dev_acc,lr\n";
  for (const auto& row : history) {
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.epoch, row.train_loss, row.train_acc, row.dev_loss,
                  row.dev_acc, row.lr);
    out << line;
  }
}

}  // namespace kws::train
