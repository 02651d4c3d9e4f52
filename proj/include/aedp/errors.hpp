#pragma once

#include <stdexcept>
#include <string>

namespace aedp {

// Raised for malformed or inconsistent input data (files, payload sizes).
// Precondition violations on numeric arguments use std::domain_error.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class SizeError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace aedp
