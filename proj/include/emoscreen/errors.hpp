#pragma once

#include <stdexcept>
#include <string>

namespace emoscreen {

// Malformed or inconsistent input data (bad file contents, shape mismatches,
// out-of-range values). CLI maps this to exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failures (missing file, short read/write). Exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. Exit code 3.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace emoscreen
