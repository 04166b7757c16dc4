#ifndef MOTIL_ERRORS_HPP
#define MOTIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace motil {

// Base for everything thrown by the library. The CLI maps subclasses to
// exit codes: config errors 2, data errors 3, numerical failures 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or unusable input data (files, sequences, CSV schemas).
struct IngestError : Error { using Error::Error; };
// Parameter outside its documented domain.
struct ParamError : Error { using Error::Error; };
// Linking failed (oversize subnet).
struct LinkError : Error { using Error::Error; };
// An operation that needs at least one track/sample got none.
struct EmptySample : Error { using Error::Error; };
// Codebook construction failed.
struct BuildError : Error { using Error::Error; };
// Histogram encoding failed (dimension mismatch).
struct EncodeError : Error { using Error::Error; };
// Model training failed (non-finite inputs or loss).
struct TrainError : Error { using Error::Error; };
// Prediction failed (dimension mismatch).
struct PredictError : Error { using Error::Error; };
// Metric computation failed (length mismatch).
struct MetricError : Error { using Error::Error; };
// Cross-validation harness failure (missing labels/folds).
struct EvalError : Error { using Error::Error; };
// Scene specification invalid.
struct SpecError : Error { using Error::Error; };
// Experiment configuration invalid or referenced file missing.
struct ConfigError : Error { using Error::Error; };
// Generic file-system level failure.
struct IoError : Error { using Error::Error; };

} // namespace motil

#endif
