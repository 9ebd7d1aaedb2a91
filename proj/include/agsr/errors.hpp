#pragma once

#include <stdexcept>
#include <string>

namespace agsr {

// Base class for all harness errors. Subclasses exist so callers can map
// failure classes onto exit codes and tests can assert on the exact kind.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Data / validation errors (CLI exit code 1).
class IoError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, int line = 0)
        : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string& id)
        : Error("duplicate id \"" + id + "\""), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

class BadRatios : public Error {
public:
    using Error::Error;
};

class EmptyAnnotationSet : public Error {
public:
    using Error::Error;
};

class MixedArtworkIds : public Error {
public:
    using Error::Error;
};

class UnknownExternalLabel : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class InsufficientRaters : public Error {
public:
    using Error::Error;
};

class DegenerateChance : public Error {
public:
    using Error::Error;
};

class MissingGold : public Error {
public:
    using Error::Error;
};

class RunIncomplete : public Error {
public:
    using Error::Error;
};

class GoldMismatch : public Error {
public:
    using Error::Error;
};

class EmptyRun : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

class ArtworkStageError : public Error {
public:
    using Error::Error;
};

// Configuration errors (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Backend / transport errors (CLI exit code 3).
class BackendError : public Error {
public:
    using Error::Error;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

class RateLimitedError : public BackendError {
public:
    using BackendError::BackendError;
};

class MalformedUpstream : public BackendError {
public:
    using BackendError::BackendError;
};

class FixtureMiss : public BackendError {
public:
    using BackendError::BackendError;
};

class UnknownArtwork : public BackendError {
public:
    using BackendError::BackendError;
};

} // namespace agsr
