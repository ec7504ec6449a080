#include "origins/error.hpp"

#include <utility>

namespace origins {

namespace {
std::string with_row(const std::string& what, std::size_t row) {
  if (row == 0) return what;
  return "row " + std::to_string(row) + ": " + what;
}
}  // namespace

ParseError::ParseError(const std::string& what, std::size_t row)
    : Error(with_row(what, row)), row_(row) {}

IoError::IoError(const std::string& what, std::string path)
    : Error(what + ": " + path), path_(std::move(path)) {}

}  // namespace origins
