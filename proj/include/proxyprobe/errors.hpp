// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxyprobe {

// Unrecoverable I/O failure: missing file, short read, failed write.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input violates a schema or an invariant hard enough to stop the stage.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// One rejected input line; accumulated into the stage error report.
struct LineError {
    uint64_t line = 0;  // 1-based
    std::string message;
};

using ErrorReport = std::vector<LineError>;

}  // namespace proxyprobe
