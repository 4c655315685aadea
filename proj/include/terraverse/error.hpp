#pragma once

#include <stdexcept>
#include <string>

namespace terraverse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, int line, int column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Wrong parameter set for a segment kind, or wrong goal count.
class ArityError : public Error {
public:
    using Error::Error;
};

class UnknownKind : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class CompileError : public Error {
public:
    using Error::Error;
};

class EmptyLibrary : public Error {
public:
    using Error::Error;
};

class GeneratorExhausted : public Error {
public:
    using Error::Error;
};

class AuthError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// An agent's training phase failed; the iteration is aborted.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace terraverse
