#ifndef FWRNN_ERRORS_HPP_
#define FWRNN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fwrnn {

/// A training step hit non-finite numbers and was aborted; nothing is
/// clamped silently.
struct NumericAbort : std::runtime_error {
    explicit NumericAbort(const std::string& what) : std::runtime_error(what) {}
};

/// Overflow inside a forward pass; the message names the time step.
struct NumericOverflow : NumericAbort {
    explicit NumericOverflow(const std::string& what) : NumericAbort(what) {}
};

}  // namespace fwrnn

#endif  // FWRNN_ERRORS_HPP_
