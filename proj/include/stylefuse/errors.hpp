#ifndef STYLEFUSE_ERRORS_HPP
#define STYLEFUSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stylefuse {

// Invalid or inconsistent user configuration. `key` names the offending
// config field so the CLI can report it verbatim.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

// Tensor shape / dimension mismatch.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite math is required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Broken internal contract (incomplete attention store, topology mismatch).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system / encoder failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stylefuse

#endif
