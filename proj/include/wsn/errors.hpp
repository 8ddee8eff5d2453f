#pragma once

#include <stdexcept>
#include <string>

namespace wsn {

/// Invalid configuration: bad parameter ranges, unknown keys, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken simulation contract, e.g. charging energy to a node that is already dead.
class SimulationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A queue whose arrival rate reaches its service rate.
class UnstableQueueError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wsn
