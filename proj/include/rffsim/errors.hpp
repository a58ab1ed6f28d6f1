#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rffsim {

// Invalid arguments: bad dimensions, nonpositive widths, out-of-range values.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Data that is structurally valid but unusable: too few samples, zero variance,
// single-class label sets.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite intermediates, divergence, singular solves.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDivergenceError : NumericError {
    using NumericError::NumericError;
};

struct UnsupportedCodeError : ParameterError {
    using ParameterError::ParameterError;
};

// Configuration failures carry the full list of problems, not just the first.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string>& ps) {
        std::string out = "configuration invalid:";
        for (const auto& p : ps) {
            out += "\n  - " + p;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace rffsim
