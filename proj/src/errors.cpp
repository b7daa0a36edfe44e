#include "llab/errors.hpp"

namespace llab {
namespace {
std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += "; ";
    out += v[i];
  }
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error(join(issues)), issues_(std::move(issues)) {}

}  // namespace llab
