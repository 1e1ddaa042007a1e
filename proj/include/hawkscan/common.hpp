#pragma once

#include <stdexcept>
#include <string>

namespace hawkscan {

/// Bad user-supplied configuration: files, parameters, cluster geometry.
/// The CLI maps this (and std::invalid_argument) to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-PSD covariance, singular normalization, overflow.
/// The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hawkscan
