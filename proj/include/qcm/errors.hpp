#pragma once

#include <stdexcept>
#include <string>

namespace qcm {

// Exit codes used by the CLI: 0 ok, 2 hypothesis refusal, 3 budget, 4 input.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the quantitative hypothesis K > R(R+1)(d-1) fails.
struct refusal_error : std::runtime_error {
    explicit refusal_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qcm
