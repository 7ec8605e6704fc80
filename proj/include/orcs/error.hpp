#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace orcs {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: unknown key, invalid value, conflicting options.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given particle system (e.g. perse with variable radii).
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Data structures that do not belong together (refit over a different particle count).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// A neighbor list row needs more slots than k_max.
class NeighborListOverflow : public Error {
 public:
  NeighborListOverflow(std::size_t particle, std::size_t required, std::size_t capacity)
      : Error("neighbor list overflow: particle " + std::to_string(particle) + " needs " +
              std::to_string(required) + " entries, capacity is " + std::to_string(capacity)),
        particle_(particle),
        required_(required),
        capacity_(capacity) {}

  std::size_t particle() const noexcept { return particle_; }
  std::size_t required() const noexcept { return required_; }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t particle_;
  std::size_t required_;
  std::size_t capacity_;
};

}  // namespace orcs
