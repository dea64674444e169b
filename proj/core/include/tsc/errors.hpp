#ifndef TSC_ERRORS_HPP_
#define TSC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tsc {

// Invalid layout, plan, flow profile, or experiment parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke an operation's precondition (wrong time, wrong shape).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numeric argument outside the domain of a formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training aborted (NaN ratios, divergence).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsc

#endif  // TSC_ERRORS_HPP_
