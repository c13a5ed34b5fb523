#pragma once

#include <stdexcept>
#include <string>

namespace rlao {

/// Bad argument value: out-of-range index, horizon, discount, or bound input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation was broken by the caller.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Query outside the domain of a partially defined object (e.g. an
/// unvisited pair of an empirical weighting).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Exact enumeration would exceed the configured path cap.
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Object used in the wrong lifecycle state (e.g. stepping an env before reset).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Observed data contradicts a modelling assumption (deterministic rewards).
class ModelViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or schema-violating experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An instance fails a structural precondition of an experiment (e.g. ergodicity).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rlao
