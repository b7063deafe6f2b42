#pragma once

#include <stdexcept>

namespace cinephase {

/// Bad configuration or arguments, detectable before any data is touched.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable, malformed, or geometrically inconsistent input data.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A processing stage could not produce a result from otherwise valid inputs.
struct pipeline_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cinephase
