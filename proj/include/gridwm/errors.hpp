#pragma once

#include <stdexcept>
#include <string>

namespace gridwm {

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// No solvable instance found within the per-seed retry budget.
class GenerationExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SteppedTerminal : public std::logic_error {
public:
    SteppedTerminal() : std::logic_error("step called on a terminal episode") {}
};

/// A search hit its node limit before proving a result either way.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EndpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Timeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A policy could not produce an output for the current state.
class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SourceExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyHeldout : public std::invalid_argument {
public:
    EmptyHeldout() : std::invalid_argument("held-out triple set is empty") {}
};

class EmptyInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gridwm
