#pragma once

#include <vector>

namespace kws::eval {

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels);

// Row = true class, column = predicted class, flattened row-major.
std::vector<long> confusion_matrix(const std::vector<int>& predictions,
                                   const std::vector<int>& labels,
                                   int num_classes);

}  // namespace kws::eval
