#pragma once

#include <stdexcept>
#include <string>

namespace gangan {

// Malformed or inconsistent input data: bad magic bytes, truncated files,
// mismatched dimensions between a file and the requested configuration.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finite ones are required: NaN/Inf losses,
// gradients, or payloads.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gangan
