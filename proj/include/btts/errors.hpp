#pragma once

#include <stdexcept>
#include <string>

namespace btts {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (bad field values, violated invariants).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed or inconsistent input data (files, tables, corpora).
struct DataError : Error {
    using Error::Error;
};

}  // namespace btts
