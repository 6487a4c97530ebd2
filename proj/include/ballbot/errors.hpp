#pragma once

#include <stdexcept>
#include <string>

namespace ballbot {

// Mass-matrix denominator fell below the singularity threshold.
struct SingularMass : std::runtime_error {
    explicit SingularMass(const std::string& what) : std::runtime_error(what) {}
};

// A state or output component is NaN or infinite.
struct NonFinite : std::runtime_error {
    explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

struct NotControllable : std::runtime_error {
    explicit NotControllable(const std::string& what) : std::runtime_error(what) {}
};

struct NotStabilizable : std::runtime_error {
    explicit NotStabilizable(const std::string& what) : std::runtime_error(what) {}
};

// Network input/parameter dimensions do not chain.
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ballbot
