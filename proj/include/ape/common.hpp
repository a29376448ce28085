#pragma once

#include <stdexcept>
#include <string>

namespace ape {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

/// Raised when the radius schedule exhausts its expansion budget without
/// crossing the decision boundary (locally constant model).
class NoCounterfactual : public Error {
public:
    explicit NoCounterfactual(const std::string& msg) : Error(msg) {}
};

/// Raised when an operation receives features it cannot handle
/// (e.g. categorical attributes in a raw-space sphere search).
class UnsupportedFeature : public Error {
public:
    explicit UnsupportedFeature(const std::string& msg) : Error(msg) {}
};

}  // namespace ape
