#include "kws/eval/roc.hpp"

#include <algorithm>
#include <cmath>

#include "kws/util/errors.hpp"

namespace kws::eval {

namespace {

double trapezoid_auc(const std::vector<double>& far,
                     const std::vector<double>& frr) {
  double auc = 0.0;
  for (size_t i = 0; i + 1 < far.size(); ++i)
    auc += (far[i] - far[i + 1]) * 0.5 * (frr[i] + frr[i + 1]);
  return auc;
}

}  // namespace

RocCurve roc_for_keyword(const std::vector<double>& scores,
                         const std::vector<char>& is_positive,
                         int grid_points) {
  if (scores.size() != is_positive.size())
    throw ShapeError("roc_for_keyword: score/mask length mismatch");
  if (grid_points < 2) throw RangeError("roc_for_keyword: grid too small");

  std::vector<double> pos, neg;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0))
      throw ValueError("roc_for_keyword: score outside [0,1]");
    (is_positive[i] ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty())
    throw ValueError(
        "roc_for_keyword: curve undefined without both positives and "
        "negatives");
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  RocCurve curve;
  curve.far.reserve(size_t(grid_points));
  curve.frr.reserve(size_t(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    const double th = double(i) / double(grid_points - 1);
    const auto neg_below =
        std::lower_bound(neg.begin(), neg.end(), th) - neg.begin();
    const auto pos_below =
        std::lower_bound(pos.begin(), pos.end(), th) - pos.begin();
    curve.far.push_back(double(neg.size() - size_t(neg_below)) /
                        double(neg.size()));
    curve.frr.push_back(double(pos_below) / double(pos.size()));
  }
  curve.auc = trapezoid_auc(curve.far, curve.frr);
  return curve;
}

namespace {

// FRR as a function of FAR: duplicate FARs keep their minimum FRR, then
// linear interpolation between the remaining points, clamped at the ends.
double interp_frr(const std::vector<double>& far, const std::vector<double>& frr,
                  double x) {
  // far runs from 1 down to (usually) 0 in sweep order
  size_t lo = 0, hi = far.size() - 1;  // indices into sweep order
  if (x >= far.front()) return frr.front();
  if (x <= far.back()) return frr.back();
  // binary search over the non-increasing FAR sequence
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (far[mid] > x)
      lo = mid;
    else
      hi = mid;
  }
  if (far[lo] == far[hi]) return std::min(frr[lo], frr[hi]);
  const double t = (far[lo] - x) / (far[lo] - far[hi]);
  return frr[lo] + t * (frr[hi] - frr[lo]);
}

}  // namespace

RocCurve vertical_average(const std::vector<RocCurve>& curves,
                          int grid_points) {
  if (curves.empty())
    throw ValueError("vertical_average: need at least one curve");
  if (grid_points < 2) throw RangeError("vertical_average: grid too small");

  // collapse each curve to strictly decreasing FAR with best (min) FRR
  std::vector<std::vector<double>> fars, frrs;
  for (const auto& c : curves) {
    std::vector<double> f, r;
    for (size_t i = 0; i < c.far.size(); ++i) {
      if (!f.empty() && c.far[i] == f.back()) {
        r.back() = std::min(r.back(), c.frr[i]);
      } else {
        f.push_back(c.far[i]);
        r.push_back(c.frr[i]);
      }
    }
    fars.push_back(std::move(f));
    frrs.push_back(std::move(r));
  }

  RocCurve avg;
  avg.far.reserve(size_t(grid_points));
  avg.frr.reserve(size_t(grid_points));
  for (int i = grid_points - 1; i >= 0; --i) {
    const double x = double(i) / double(grid_points - 1);
    double acc = 0.0;
    for (size_t c = 0; c < fars.size(); ++c)
      acc += interp_frr(fars[c], frrs[c], x);
    avg.far.push_back(x);
    avg.frr.push_back(acc / double(fars.size()));
  }
  avg.auc = trapezoid_auc(avg.far, avg.frr);
  return avg;
}

}  // namespace kws::eval
