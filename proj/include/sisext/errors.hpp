#pragma once

#include <stdexcept>
#include <string>

namespace sisext {

// Rates with mu == lambda make the phase-clock function s(z) undefined.
class SingularParameters : public std::domain_error {
public:
    explicit SingularParameters(const std::string& what) : std::domain_error(what) {}
};

// Raised when an exact computation would exceed its configured size limit.
class CostGuardExceeded : public std::length_error {
public:
    explicit CostGuardExceeded(const std::string& what) : std::length_error(what) {}
};

// Raised when too many Monte Carlo replicates hit the censoring horizon.
class CensoringExceeded : public std::runtime_error {
public:
    explicit CensoringExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sisext
