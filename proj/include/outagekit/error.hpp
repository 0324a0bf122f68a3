#pragma once

#include <stdexcept>
#include <string>

namespace outagekit {

/// Hard error raised by parsers and analytics. Carries a plain message;
/// callers that need file/offset context prepend it at the throw site.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Error signalling bad command-line usage (maps to exit code 2).
class UsageError : public Error {
public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

} // namespace outagekit
