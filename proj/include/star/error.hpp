#pragma once

#include <stdexcept>
#include <string>

namespace star {

// All recoverable failures in the pipeline surface as star::Error. The CLI
// catches it at top level, prints the message and exits nonzero.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration that cannot produce a valid run (k=1 batches, single-author
// corpus, l<2 and the like).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Artifact hash or format mismatch; raised before any compute touches the
// artifact's payload.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

}  // namespace star
