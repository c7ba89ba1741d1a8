#pragma once

#include <vector>

namespace kws::eval {

// Detection curve swept over a uniform threshold grid on [0, 1]:
//   FAR(th) = #(negatives with score >= th) / #negatives
//   FRR(th) = #(positives with score <  th) / #positives
// Points are stored in threshold order (FAR non-increasing). auc integrates
// FRR over the FAR axis by trapezoid; smaller is better.
struct RocCurve {
  std::vector<double> far, frr;
  double auc = 0.0;
};

RocCurve roc_for_keyword(const std::vector<double>& scores,
                         const std::vector<char>& is_positive,
                         int grid_points = 1001);

// Pointwise mean of FRR over a shared FAR grid, each curve linearly
// interpolated (duplicate FAR values collapse to their best FRR).
RocCurve vertical_average(const std::vector<RocCurve>& curves,
                          int grid_points = 1001);

}  // namespace kws::eval
