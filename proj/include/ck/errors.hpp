#ifndef CK_ERRORS_HPP
#define CK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ck {

// Raised when a combinatorial enumeration would exceed its configured cap.
class EnumerationLimitError : public std::length_error {
public:
    explicit EnumerationLimitError(const std::string& what) : std::length_error(what) {}
};

// Raised when a graph or subset family violates a structural precondition
// (disconnected induced subgraph, crossing partition where noncrossing is needed, ...).
class StructuralError : public std::invalid_argument {
public:
    explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when a request is valid but outside what this build supports (size caps).
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for invalid user configuration; `key` names the offending option.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Raised when a numerical integration fails to reach its tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved_error() const { return achieved_; }

private:
    double achieved_;
};

}  // namespace ck

#endif
