#pragma once

#include <stdexcept>
#include <string>

namespace cfm {

// Base class for all solver-level failures.  Callers that need to map
// failures onto process exit codes can catch the subcategories below.
class CfmError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Configuration / input problems (bad units, unknown preset, bad parameters).
class ConfigError : public CfmError {
public:
  using CfmError::CfmError;
};

// Numerical propagation problems.
class SolverError : public CfmError {
public:
  using CfmError::CfmError;
};

class NonFiniteCoefficient : public SolverError {
public:
  using SolverError::SolverError;
};

class NonFiniteValue : public SolverError {
public:
  using SolverError::SolverError;
};

class StepUnderflow : public SolverError {
public:
  using SolverError::SolverError;
};

class NoSaturation : public SolverError {
public:
  using SolverError::SolverError;
};

class NoStabilization : public SolverError {
public:
  using SolverError::SolverError;
};

class SingularBeta : public SolverError {
public:
  using SolverError::SolverError;
};

class ComplexSpectrum : public SolverError {
public:
  using SolverError::SolverError;
};

class UnknownUnit : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class UnsupportedTail : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class InvalidExponents : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class NoBoundLevels : public SolverError {
public:
  using SolverError::SolverError;
};

class NotAnEigenvalue : public SolverError {
public:
  using SolverError::SolverError;
};

class TooFewLevels : public SolverError {
public:
  using SolverError::SolverError;
};

class LevelAboveDissociation : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class NonNegativeEnergy : public ConfigError {
public:
  using ConfigError::ConfigError;
};

// Fit-stage failures (Broyden not converging, missing levels, ...).
class FitError : public CfmError {
public:
  using CfmError::CfmError;
};

class MaxIterations : public FitError {
public:
  using FitError::FitError;
};

class SolverFailure : public FitError {
public:
  using FitError::FitError;
};

class IoError : public CfmError {
public:
  using CfmError::CfmError;
};

} // namespace cfm
