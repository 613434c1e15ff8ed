#pragma once

#include <stdexcept>
#include <string>

namespace smdp {

/// Malformed or inconsistent input: models, option sets, plans, arguments.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run that started but could not finish (iteration caps, numeric failure).
class RunAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace smdp
