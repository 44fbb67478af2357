#pragma once

#include <stdexcept>
#include <string>

namespace medc {

// Error taxonomy maps onto the CLI exit codes:
//   UsageError -> 1, data-shaped errors -> 2, IncompletenessError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad invocation: unknown dataset/corruption name, malformed flag values.
struct UsageError : Error {
    using Error::Error;
};

// A kernel hyperparameter outside its valid range.
struct ParamError : Error {
    using Error::Error;
};

// Corruption asked to run on an image it is not defined for
// (e.g. saturate on a single-channel image).
struct ApplicabilityError : Error {
    using Error::Error;
};

// Malformed input: undecodable image, channel mismatch, schema violation,
// hash mismatch during verification.
struct DataError : Error {
    using Error::Error;
};

// Structurally valid input that is missing required pieces
// (prediction strata, generated files).
struct IncompletenessError : Error {
    using Error::Error;
};

}  // namespace medc
