#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace f2gan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown on any dimension disagreement. Messages name both dimensions.
class ShapeError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a training loop produces a non-finite loss or parameter.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed configs and files. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Stage-1 binary outcome: a sample is either a real internal fault (eligible
/// for Stage-2 classification) or an anomaly (classification terminates).
enum class Verdict { InternalFault, Anomaly };

inline const char* to_string(Verdict v) {
    return v == Verdict::InternalFault ? "InternalFault" : "Anomaly";
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "InternalFault") return Verdict::InternalFault;
    if (s == "Anomaly") return Verdict::Anomaly;
    throw ConfigError("unknown verdict: " + s);
}

inline void require_dims(Index got, Index want, const std::string& what) {
    if (got != want)
        throw ShapeError(what + ": expected " + std::to_string(want) + ", got " +
                         std::to_string(got));
}

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) throw NumericError(what + ": non-finite entries");
}

}  // namespace f2gan
