#pragma once

#include <stdexcept>
#include <string>

namespace affinity {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be read or is not syntactically valid (JSON, embedding header).
class ParseError : public Error {
public:
    using Error::Error;
};

// Syntactically valid input that violates the survey schema (duplicate ids,
// out-of-range option indices, unknown question references).
class SchemaError : public Error {
public:
    using Error::Error;
};

// Embedding-file format violations (header/body mismatch, bad dimensions).
class FormatError : public Error {
public:
    using Error::Error;
};

// An operation was called with invalid parameters (k out of range, zero ratio).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Runtime data fed to an operation is unusable (asymmetric similarity matrix,
// mismatched point sets, empty graph).
class InputError : public Error {
public:
    using Error::Error;
};

// Wraps any stage failure inside the end-to-end pipeline with the stage name.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& cause)
        : Error("[" + stage + "] " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace affinity
