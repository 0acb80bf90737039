#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace syncnet {

// Base for every data-level failure raised by the library. The CLI maps these
// to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// More than half of the non-blank lines of an input stream were malformed.
class CorpusRejected : public Error {
public:
    CorpusRejected(std::size_t malformed, std::size_t total)
        : Error("corpus rejected: " + std::to_string(malformed) + " of " + std::to_string(total) +
                " records malformed"),
          malformed(malformed), total(total) {}

    std::size_t malformed;
    std::size_t total;
};

class InvalidRecord : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// A network-level quantity was requested over an empty population.
class UndefinedNetwork : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Power iteration ran out of iterations; the last iterate is kept so callers
// can still inspect or use it.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::string what, std::vector<double> last_iterate)
        : Error(std::move(what)), last_iterate(std::move(last_iterate)) {}

    std::vector<double> last_iterate;
};

} // namespace syncnet
