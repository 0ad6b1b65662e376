#pragma once

#include <stdexcept>
#include <string>

namespace aic3 {

// Malformed or inconsistent caller input (bad image shape, bad config value).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested study design cannot be generated (infeasible counts, duplicates).
class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Study-service errors. Each maps onto one HTTP status in the API layer.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExpiredError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aic3
