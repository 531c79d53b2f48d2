#pragma once

#include <stdexcept>
#include <string>

namespace oposim {

// Bad or inconsistent configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Physically ill-posed request: above threshold, zero trigger probability,
// unphysical state (CLI exit code 3).
class PhysicsError : public std::runtime_error {
 public:
  explicit PhysicsError(const std::string& what) : std::runtime_error(what) {}
};

}
