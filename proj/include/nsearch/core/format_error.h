#pragma once

#include <stdexcept>
#include <string>

namespace nsearch {

// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nsearch
