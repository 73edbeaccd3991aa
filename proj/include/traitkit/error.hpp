#pragma once

#include <stdexcept>
#include <string>

namespace traitkit {

// Malformed or inconsistent input data. The CLI maps this to exit code 2;
// violated call contracts surface as std::invalid_argument instead.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace traitkit
