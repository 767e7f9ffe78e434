#pragma once

#include <stdexcept>
#include <string>

namespace ffdelay {

/// Violation of a documented precondition or internal invariant.
class contract_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Lossy or impossible value conversion (names the offending entry).
class conversion_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input in the text matrix format.
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ffdelay
