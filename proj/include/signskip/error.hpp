#ifndef SIGNSKIP_ERROR_HPP
#define SIGNSKIP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace signskip {

// Dimension disagreement between operands (vector length vs matrix cols, etc).
struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rejected value content, e.g. NaN/Inf weights at load time.
struct value_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated model/sidecar files.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace signskip

#endif  // SIGNSKIP_ERROR_HPP
