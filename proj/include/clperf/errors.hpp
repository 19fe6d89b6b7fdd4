#pragma once

#include <stdexcept>
#include <string>

namespace clperf {

// Bad configuration: scenario files, chain spec values, CLI flag combinations.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or inconsistent data: malformed records, tampered logs, protocol
// violations. The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

};  // namespace clperf
