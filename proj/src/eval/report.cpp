#include "kws/eval/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kws/eval/metrics.hpp"
#include "kws/util/errors.hpp"

namespace fs = std::filesystem;

namespace kws::eval {

EvalReport evaluate(model::Model& model, const std::vector<data::Entry>& split,
                    data::FeatureSource& source, int batch_size) {
  data::BatchStream stream(split, source, batch_size, /*seed=*/0,
                           /*shuffle=*/false);
  stream.start_epoch(0);

  const int k = model.spec().num_classes;
  std::vector<int> predictions, labels;
  std::vector<std::vector<double>> scores(10);  // per keyword

  Tensor x;
  std::vector<int> batch_labels;
  while (stream.next(x, batch_labels)) {
    const Tensor probs = model.predict_probs(x);
    for (int i = 0; i < probs.dim(0); ++i) {
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (probs.at(i, j) > probs.at(i, best)) best = j;
      predictions.push_back(best);
      labels.push_back(batch_labels[size_t(i)]);
      for (int kw = 0; kw < 10; ++kw)
        scores[size_t(kw)].push_back(probs.at(i, kw));
    }
  }

  EvalReport report;
  report.total = static_cast<long>(labels.size());
  report.accuracy = accuracy(predictions, labels);
  report.confusion = confusion_matrix(predictions, labels, k);
  for (int kw = 0; kw < 10; ++kw) {
    std::vector<char> positive(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) positive[i] = labels[i] == kw;
    report.keyword_curves.push_back(roc_for_keyword(scores[size_t(kw)], positive));
  }
  report.averaged = vertical_average(report.keyword_curves);
  return report;
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ROC CSV: " + path);
  out << "false_alarm_rate,false_reject_rate\n";
  for (size_t i = 0; i < curve.far.size(); ++i) {
    char line[80];
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", curve.far[i],
                  curve.frr[i]);
    out << line;
  }
  out << "# auc," << curve.auc << '\n';
}

void write_roc_svg(const RocCurve& curve, const std::string& path,
                   const std::string& title) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ROC SVG: " + path);
  const int w = 480, h = 480, margin = 48;
  const double span = double(w - 2 * margin);
  auto px = [&](double far) { return margin + far * span; };
  auto py = [&](double frr) { return h - margin - frr * span; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << span
      << "\" height=\"" << span << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\">false alarm rate</text>\n";
  out << "<text x=\"14\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << h / 2
      << ")\">false reject rate</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" "
         "points=\"";
  for (size_t i = 0; i < curve.far.size(); ++i) {
    char pt[64];
    std::snprintf(pt, sizeof(pt), "%.2f,%.2f ", px(curve.far[i]),
                  py(curve.frr[i]));
    out << pt;
  }
  out << "\"/>\n";
  char auc_text[64];
  std::snprintf(auc_text, sizeof(auc_text), "AUC = %.5f", curve.auc);
  out << "<text x=\"" << w - margin - 8 << "\" y=\"" << margin + 18
      << "\" text-anchor=\"end\">" << auc_text << "</text>\n";
  out << "</svg>\n";
}

void write_report_files(const EvalReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    std::ofstream out(dir / "confusion.csv");
    if (!out) throw IoError("cannot write confusion.csv under " + out_dir);
    const int k = 12;
    out << "true\\pred";
    for (int j = 0; j < k; ++j) out << ',' << data::label_name(j);
    out << '\n';
    for (int i = 0; i < k; ++i) {
      out << data::label_name(i);
      for (int j = 0; j < k; ++j)
        out << ',' << report.confusion[static_cast<size_t>(i) * k + j];
      out << '\n';
    }
  }

  for (size_t kw = 0; kw < report.keyword_curves.size(); ++kw)
    write_roc_csv(report.keyword_curves[kw],
                  (dir / ("roc_" + data::label_name(int(kw)) + ".csv")).string());
  write_roc_csv(report.averaged, (dir / "roc_average.csv").string());
  write_roc_svg(report.averaged, (dir / "roc_average.svg").string(),
                "vertically averaged ROC");

  nlohmann::json summary = {{"accuracy", report.accuracy},
                            {"examples", report.total},
                            {"average_auc", report.averaged.auc}};
  std::ofstream out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

}  // namespace kws::eval
