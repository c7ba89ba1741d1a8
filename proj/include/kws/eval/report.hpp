#pragma once

#include <string>
#include <vector>

#include "kws/data/batcher.hpp"
#include "kws/eval/roc.hpp"
#include "kws/model/model.hpp"

namespace kws::eval {

struct EvalReport {
  double accuracy = 0.0;
  long total = 0;
  std::vector<long> confusion;            // 12 x 12 row-major
  std::vector<RocCurve> keyword_curves;   // one per keyword, classes 0..9
  RocCurve averaged;
};

// Scores examples with the frozen model; the detection score for keyword k
// is the softmax posterior of class k, negatives are all non-k examples.
EvalReport evaluate(model::Model& model, const std::vector<data::Entry>& split,
                    data::FeatureSource& source, int batch_size = 100);

// confusion.csv, roc_<keyword>.csv, roc_average.csv/svg, summary.json
void write_report_files(const EvalReport& report, const std::string& out_dir);

void write_roc_csv(const RocCurve& curve, const std::string& path);
void write_roc_svg(const RocCurve& curve, const std::string& path,
                   const std::string& title);

}  // namespace kws::eval
