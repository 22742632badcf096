#pragma once

#include <stdexcept>
#include <string>

namespace nof1 {

// Each error category maps to a distinct CLI exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nof1
