#pragma once

#include <stdexcept>
#include <string>

namespace vhgpr {

/// Raised when a deformation gradient (or derived tensor) is not admissible,
/// e.g. det(F) <= 0 or a singular C where an inverse is required.
class InvalidDeformationError : public std::runtime_error {
public:
    explicit InvalidDeformationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when invariants leave the admissible domain of a material model
/// (Gent logarithm, USS square roots).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a least-squares calibration has a rank-deficient normal system.
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when GPR training cannot produce a usable model.
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when the constrained fit is infeasible at every probed hyperparameter.
class ConstrainedFitError : public std::runtime_error {
public:
    ConstrainedFitError(const std::string& what, int worst_point, double worst_violation)
        : std::runtime_error(what), worst_point(worst_point), worst_violation(worst_violation) {}

    int worst_point;         ///< index of the most-violated constraint
    double worst_violation;  ///< signed value of that constraint functional
};

/// Raised when coefficient extraction is impossible (zero design matrix
/// against a nonzero stress).
class ExtractionError : public std::runtime_error {
public:
    explicit ExtractionError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the experiment harness with experiment context attached.
class ExperimentError : public std::runtime_error {
public:
    explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vhgpr
