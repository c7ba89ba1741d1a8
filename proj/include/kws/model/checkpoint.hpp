#pragma once

#include <string>

#include "kws/model/model.hpp"

namespace kws::model {

// Binary checkpoint: 8-byte magic, JSON manifest (variant, channels, heads,
// classes, version), then named tensors as raw little-endian doubles.
// Round trips are bit-exact. Trainable parameters and batch-norm running
// statistics are both stored.
void save_checkpoint(const std::string& path, Model& model);

// Rebuilds the variant named in the manifest and loads every tensor by name.
// A name or shape mismatch reports the offending entry and both shapes.
Model load_checkpoint(const std::string& path);

}  // namespace kws::model
