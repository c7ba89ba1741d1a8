#include "kws/eval/metrics.hpp"

#include "kws/util/errors.hpp"

namespace kws::eval {

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw ShapeError("accuracy: prediction/label length mismatch");
  if (predictions.empty()) throw ValueError("accuracy: empty input");
  long correct = 0;
  for (size_t i = 0; i < predictions.size(); ++i)
    correct += predictions[i] == labels[i];
  return double(correct) / double(predictions.size());
}

std::vector<long> confusion_matrix(const std::vector<int>& predictions,
                                   const std::vector<int>& labels,
                                   int num_classes) {
  if (predictions.size() != labels.size())
    throw ShapeError("confusion_matrix: prediction/label length mismatch");
  std::vector<long> m(static_cast<size_t>(num_classes) * num_classes, 0);
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes || predictions[i] < 0 ||
        predictions[i] >= num_classes)
      throw ValueError("confusion_matrix: class index out of range");
    ++m[static_cast<size_t>(labels[i]) * num_classes + predictions[i]];
  }
  return m;
}

}  // namespace kws::eval
