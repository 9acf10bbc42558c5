#pragma once

#include <stdexcept>
#include <string>

namespace cogsim {

/// Invalid static configuration or parameter set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid runtime input to an operation (caller contract violation).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical method failed to converge or broke down.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver assignment was rejected by an instance's constraint system.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or serialization failure, annotated with the path involved.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cogsim
