#pragma once

#include <stdexcept>
#include <string>

namespace taskaug {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error("ShapeMismatch: " + what) {}
};

struct DegenerateVolume : std::runtime_error {
    explicit DegenerateVolume(const std::string& what)
        : std::runtime_error("DegenerateVolume: " + what) {}
};

struct InsufficientSubjects : std::runtime_error {
    explicit InsufficientSubjects(const std::string& what)
        : std::runtime_error("InsufficientSubjects: " + what) {}
};

struct EmptySplit : std::runtime_error {
    explicit EmptySplit(const std::string& what) : std::runtime_error("EmptySplit: " + what) {}
};

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(const std::string& what) : std::runtime_error("NonFiniteLoss: " + what) {}
};

struct UnpairedRuns : std::runtime_error {
    explicit UnpairedRuns(const std::string& what) : std::runtime_error("UnpairedRuns: " + what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error("IoError: " + what) {}
};

}  // namespace taskaug
