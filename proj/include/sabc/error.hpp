#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace sabc {

/// Base of every error raised by the toolkit. A pipeline stage may prepend its
/// name to the message as the error propagates outward.
class Error : public std::exception {
public:
    explicit Error(std::string message) : message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    const std::string& stage() const noexcept { return stage_; }

    void tag_stage(const std::string& stage) {
        if (stage_.empty()) {
            stage_ = stage;
            message_ = "[" + stage + "] " + message_;
        }
    }

private:
    std::string message_;
    std::string stage_;
};

/// Bad input: violated preconditions, malformed configs or artifacts.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A computation that could not be completed numerically.
class NumericalError : public Error {
public:
    explicit NumericalError(std::string message,
                            double condition = std::numeric_limits<double>::quiet_NaN())
        : Error(std::move(message)), condition_(condition) {}

    /// Condition estimate attached to the failure, NaN when not applicable.
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

}  // namespace sabc
