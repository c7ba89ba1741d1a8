#pragma once

#include <stdexcept>
#include <string>

namespace kws {

// Tensor/layer dimension disagreements.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input values (non-finite samples, labels out of range, ...).
class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside their legal range (dilation < 1, band edge > Nyquist).
class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration: unknown variant, missing dataset lists, empty split.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite numbers where finite ones are required (diverged training).
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kws
