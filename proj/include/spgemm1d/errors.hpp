#ifndef SPGEMM1D_ERRORS_HPP
#define SPGEMM1D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spgemm1d {

// Error taxonomy shared by the library, the C API status codes and the CLI
// exit paths.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& msg) : Error(msg) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line) : Error(make(msg, line)), line_(line) {}
    long line() const { return line_; }

private:
    static std::string make(const std::string& msg, long line) {
        return msg + " (line " + std::to_string(line) + ")";
    }
    long line_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Invariant breaches inside the runtime; never user-triggerable.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(msg) {}
};

}  // namespace spgemm1d

#endif
