#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etaxi {

// Base for every error the simulator raises on purpose. Anything else that
// escapes is a plain std:: exception from the runtime.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConstructionError : public Error {
public:
    using Error::Error;
};

class NoPathError : public Error {
public:
    using Error::Error;
};

// Simulation bug: an agent protocol was violated (e.g. leave without enter).
class ProtocolError : public Error {
public:
    using Error::Error;
};

class SchedulingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InventoryError : public Error {
public:
    using Error::Error;
};

class StrandedError : public Error {
public:
    using Error::Error;
};

class LogError : public Error {
public:
    using Error::Error;
};

class PairingError : public Error {
public:
    using Error::Error;
};

class SpecError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Command referencing a taxi/request/prompt that does not exist.
class TargetError : public Error {
public:
    using Error::Error;
};

class CommandError : public Error {
public:
    CommandError(std::size_t index, const std::string& reason)
        : Error("command " + std::to_string(index) + ": " + reason), index_(index), reason_(reason) {}

    std::size_t index() const noexcept { return index_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t index_;
    std::string reason_;
};

}  // namespace etaxi
