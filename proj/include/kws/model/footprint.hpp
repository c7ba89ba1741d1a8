#pragma once

#include <string>
#include <vector>

#include "kws/model/model.hpp"

namespace kws::model {

struct FootprintRow {
  std::string layer;
  std::string k, c, d;  // table columns; "-" where not applicable
  long params = 0;
  long mults = 0;
};

// Parameter and per-inference multiply counts, conv/FC/attention weights
// only; batch-norm scale/shift is tracked in bn_params on the side.
struct Footprint {
  std::vector<FootprintRow> rows;
  long total_params = 0;
  long total_mults = 0;
  long bn_params = 0;
  std::string note;  // documented deltas vs. published table values
};

Footprint footprint(const ModelSpec& spec);

std::string footprint_table(const Footprint& fp);
void write_footprint_csv(const Footprint& fp, const std::string& path);

}  // namespace kws::model
