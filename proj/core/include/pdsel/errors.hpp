#pragma once

#include <stdexcept>
#include <string>

namespace pdsel {

// Error categories map one-to-one onto CLI exit codes (see tools/).
struct argument_error : std::invalid_argument {
  explicit argument_error(const std::string& msg) : std::invalid_argument(msg) {}
};

struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct estimation_error : std::runtime_error {
  explicit estimation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct capacity_error : std::runtime_error {
  explicit capacity_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pdsel
