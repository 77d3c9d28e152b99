#pragma once

#include <stdexcept>
#include <string>

namespace pisync {

// Violated precondition on a library call (non-monotone clock read, bad
// lifecycle schedule, degenerate input).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Invalid or inconsistent experiment configuration. Parsed configs carry
// file/line context in the message.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pisync
