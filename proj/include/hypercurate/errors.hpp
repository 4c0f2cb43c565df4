#pragma once

#include <stdexcept>
#include <string>

namespace hypercurate {

/// Process exit codes shared by every command.
enum class ExitCode : int {
    ok = 0,
    validation = 1,
    io = 2,
    internal = 3,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

class DegenerateGeometryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CrossCrsError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotFoundError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SizeLimitError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// raster_io
class OutOfBoundsError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MaskMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// benchmark
class CoverageError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MappingError : public ValidationError {
public:
    explicit MappingError(const std::string& what, long code = 0)
        : ValidationError(what), source_code_(code) {}
    long source_code() const noexcept { return source_code_; }

private:
    long source_code_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

/// An internal invariant was broken; indicates a bug in the caller or library.
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error(ExitCode::internal, what) {}
};

}  // namespace hypercurate
